use catql::check::suites;

#[test]
fn every_randomized_property_holds() {
    let outcomes = suites::run_all(7, 60);
    for o in &outcomes {
        println!("{o}");
    }
    assert!(outcomes.iter().all(|o| o.passed()));
}
