use unitindex::examples::random_ce_system;
use unitindex::index::{base_exprs, christensen_evans, index_report};
use unitindex::tensor::tensor_system;
use unitindex::AlgebraDescriptor;

#[test]
fn benchmark_inputs_are_valid() {
    for units in [4, 8] {
        let sys = random_ce_system(&AlgebraDescriptor::matrix(2), 2, units, 5).unwrap();
        let report = index_report(&sys, &base_exprs(&sys), 1e-8).unwrap();
        assert!(report.numerical_rank <= 2 * 2 * 2);
    }
    let sys = random_ce_system(&AlgebraDescriptor::new(vec![2, 1]).unwrap(), 3, 5, 7).unwrap();
    assert!(christensen_evans(&sys, 1e-10).unwrap().residual < 1e-7);
    let a = random_ce_system(&AlgebraDescriptor::matrix(2), 2, 3, 9).unwrap();
    let b = random_ce_system(&AlgebraDescriptor::matrix(2), 2, 3, 10).unwrap();
    assert_eq!(tensor_system(&a, &b).unwrap().system.len(), 9);
}
