use std::sync::{Arc, Barrier};

use parley_core::persistence::{RegistryStore, SurveyRecord};
use parley_core::{Transcript, Utterance};

fn transcript(id: &str, name: &str) -> Transcript {
    Transcript::from_unsorted(
        id,
        vec![
            Utterance::bot("Hello, what is your name?", 0, 1600).unwrap(),
            Utterance::user(name, 1600, 2100).unwrap(),
        ],
    )
    .unwrap()
}

fn rated(r: u8) -> SurveyRecord {
    SurveyRecord {
        answers: Vec::new(),
        rating: Some(r),
    }
}

#[test]
fn concurrent_writers_in_separate_stores_both_land() {
    // Independent store handles on one directory behave like separate
    // processes: only the file lock serializes them.
    let dir = tempfile::tempdir().unwrap();
    let barrier = Arc::new(Barrier::new(8));
    let handles: Vec<_> = (0..8)
        .map(|i| {
            let root = dir.path().to_path_buf();
            let barrier = barrier.clone();
            std::thread::spawn(move || {
                let store = RegistryStore::open(&root).unwrap();
                let name = format!("user{}", i % 4);
                barrier.wait();
                store
                    .record_session(Some(&name), &transcript(&format!("s{i}"), &name), None, &rated(1 + (i % 5) as u8))
                    .unwrap();
            })
        })
        .collect();
    for h in handles {
        h.join().unwrap();
    }

    let store = RegistryStore::open(dir.path()).unwrap();
    let registry = store.snapshot();
    assert_eq!(registry.len(), 4);
    let mut sessions: Vec<String> = registry
        .profiles()
        .flat_map(|p| p.sessions.iter().cloned())
        .collect();
    sessions.sort();
    assert_eq!(sessions, (0..8).map(|i| format!("s{i}")).collect::<Vec<_>>());
    for i in 0..8 {
        assert!(store.load_session(&format!("s{i}")).is_ok());
    }
}

#[test]
fn two_users_concurrently() {
    let dir = tempfile::tempdir().unwrap();
    let store = Arc::new(RegistryStore::open(dir.path()).unwrap());
    let a = {
        let store = store.clone();
        std::thread::spawn(move || store.record_session(Some("Max"), &transcript("a1", "Max"), None, &rated(5)))
    };
    let b = {
        let store = store.clone();
        std::thread::spawn(move || store.record_session(Some("Rhea"), &transcript("b1", "Rhea"), None, &rated(4)))
    };
    a.join().unwrap().unwrap();
    b.join().unwrap().unwrap();
    assert_eq!(store.lookup("max").unwrap().last_rating, Some(5));
    assert_eq!(store.lookup("RHEA").unwrap().last_rating, Some(4));
}

#[test]
fn other_handles_see_committed_state() {
    let dir = tempfile::tempdir().unwrap();
    let writer = RegistryStore::open(dir.path()).unwrap();
    let reader = RegistryStore::open(dir.path()).unwrap();
    assert!(reader.lookup("Max").is_none());
    writer.record_session(Some("Max"), &transcript("s1", "Max"), None, &rated(3)).unwrap();
    assert_eq!(reader.lookup("max").unwrap().last_rating, Some(3));
}
