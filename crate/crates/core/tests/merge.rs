#[path = "support/fixtures.rs"]
mod fixtures;

use gridseam_core::merge::{
    merge_cases, strip_equivalent, swap_equivalent, BoundarySpec, EquivalentKind,
    EquivalentLibrary,
};
use gridseam_core::netmodel::validate_case;

fn boundary() -> BoundarySpec {
    BoundarySpec::from_json(&fixtures::read("desk/boundary.json")).unwrap()
}

fn library() -> EquivalentLibrary {
    EquivalentLibrary::load_dir(&fixtures::data("desk/equivalents")).unwrap()
}

fn external_buses(case: &gridseam_core::NetworkCase) -> usize {
    let areas = &case.equivalent.as_ref().unwrap().areas;
    case.buses.iter().filter(|b| areas.contains(&b.area)).count()
}

#[test]
fn shipped_desk_case_is_the_merge_of_its_parts() {
    let host = fixtures::case("desk/host.json");
    let smtl = fixtures::case("desk/equivalents/smtl.json");
    let (host0, smtl0) = (host.clone(), smtl.clone());
    let merged = merge_cases(&host, &smtl, &boundary()).unwrap();
    assert_eq!(host, host0);
    assert_eq!(smtl, smtl0);
    assert_eq!(merged, fixtures::case("desk/desk_case.json"));
    assert!(validate_case(&merged).is_empty());
}

#[test]
fn swap_changes_external_bus_count_and_back() {
    let desk = fixtures::case("desk/desk_case.json");
    let lib = library();
    assert_eq!(external_buses(&desk), 1);
    let detailed = swap_equivalent(&desk, EquivalentKind::Detailed, &lib).unwrap();
    assert_eq!(external_buses(&detailed), 5);
    assert!(validate_case(&detailed).is_empty());
    assert_eq!(detailed.buses.len(), desk.buses.len() + 4);
    let same = swap_equivalent(&detailed, EquivalentKind::Detailed, &lib).unwrap();
    assert_eq!(same, detailed);
    let back = swap_equivalent(&detailed, EquivalentKind::Smtl, &lib).unwrap();
    assert_eq!(back, desk);
}

#[test]
fn strip_recovers_host() {
    let desk = fixtures::case("desk/desk_case.json");
    let host = strip_equivalent(&desk).unwrap();
    assert_eq!(host, fixtures::case("desk/host.json"));
}

#[test]
fn empty_corridor_is_rejected() {
    let host = fixtures::case("desk/host.json");
    let smtl = fixtures::case("desk/equivalents/smtl.json");
    let mut b = boundary();
    b.interconnection_branch = None;
    b.transformers.clear();
    let err = merge_cases(&host, &smtl, &b).unwrap_err();
    assert!(err.to_string().contains("corridor") || err.to_string().contains("element"), "{err}");
}
