use fgqa::anneal::{evolve, success_probability, EvolveOptions, Schedule};
use fgqa::embed::{compile_physical, decode, embed_complete_graph, verify_embedding, Embedding};
use fgqa::ising::{ground_states_bruteforce, IsingModel, QubitParams};

fn k4() -> IsingModel {
    let mut m = IsingModel::new(4);
    let vals = [0.2, -0.25, 0.1, 0.15, -0.05, 0.3];
    let mut k = 0;
    for i in 0..4 {
        for j in i + 1..4 {
            m.set_coupling(i, j, vals[k]).unwrap();
            k += 1;
        }
    }
    m.set_field(0, 0.12).unwrap();
    m.set_field(3, -0.07).unwrap();
    m
}

#[test]
fn embedding_survives_json_round_trip() {
    let logical = k4();
    let emb = embed_complete_graph(&logical, 4, 4, 0.25).unwrap();
    let back: Embedding = serde_json::from_str(&serde_json::to_string(&emb).unwrap()).unwrap();
    assert_eq!(back, emb);
    let (phys, _) = compile_physical(&back, &logical).unwrap();
    let report = verify_embedding(&back, &logical, &phys).unwrap();
    assert!(report.is_clean());
    assert!(report.ground_states.unwrap().sets_equal);
}

#[test]
fn slow_anneal_of_embedded_problem_decodes_to_optimum() {
    let mut logical = IsingModel::new(3);
    logical.set_coupling(0, 1, 0.2).unwrap();
    logical.set_coupling(0, 2, -0.15).unwrap();
    logical.set_coupling(1, 2, 0.1).unwrap();
    logical.set_field(0, 0.1).unwrap();
    let emb = embed_complete_graph(&logical, 3, 3, 0.25).unwrap();
    let (phys, _) = compile_physical(&emb, &logical).unwrap();
    let qubits = QubitParams::uniform(phys.n(), 0.3);
    let r = evolve(&phys, &qubits, &Schedule::linear(400.0, 8000), &EvolveOptions::default()).unwrap();
    assert!(r.norm_drift < 1e-9);
    let gs = ground_states_bruteforce(&phys).unwrap();
    assert!(success_probability(&r, &gs.states).unwrap() > 0.9);
    let decoded = decode(&emb, &r.most_probable).unwrap();
    assert!(decoded.all_intact());
    assert!(ground_states_bruteforce(&logical).unwrap().states.contains(&decoded.spins));
}
