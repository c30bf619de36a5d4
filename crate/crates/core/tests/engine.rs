use worldforge_core::dsl::check;
use worldforge_core::engine::{canonical_serialize, deserialize, Game, GameState, PropertyValue, SerializeMode};

const CORPUS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../corpus");

fn load(name: &str) -> Game {
    let src = std::fs::read_to_string(format!("{CORPUS}/{name}/game.wg")).unwrap();
    Game::new(check(&src).unwrap())
}

fn small(body: &str) -> Game {
    let src = format!("game \"t\" {{\n task \"Test.\"\n room kitchen\n {body}\n}}");
    Game::new(check(&src).unwrap_or_else(|d| panic!("{d:?}")))
}

fn play(game: &Game, state: &GameState, cmds: &[&str]) -> (String, GameState) {
    let mut s = state.clone();
    let mut obs = String::new();
    for c in cmds {
        let (o, next) = game.step(&s, c).unwrap();
        obs = o;
        s = next;
    }
    (obs, s)
}

fn real(state: &GameState, name: &str, key: &str) -> f64 {
    let id = state.find_by_name(name).unwrap();
    state.get(id).unwrap().prop(key).unwrap().as_real().unwrap()
}

#[test]
fn minimal_game_has_room_and_agent() {
    let game = small("win true score 1");
    let state = game.instantiate(0).unwrap();
    assert_eq!(state.objects.len(), 2);
    assert_eq!(game.enumerate_valid_actions(&state).unwrap(), ["look around", "inventory", "wait"]);
    assert_eq!(game.describe(&state).unwrap(), "You are in the kitchen. There is nothing here.");
}

#[test]
fn minimal_game_starts_unwon_with_zero_score() {
    let game = small("win kitchen.isOpen == false score 1");
    let state = game.instantiate(0).unwrap();
    assert_eq!(state.score, 0);
    assert_eq!(state.num_steps, 0);
    assert!(!state.game_over);
}

#[test]
fn unknown_container_is_an_instantiation_fault() {
    let game = small("object pot : Container in pantry\n win true score 1");
    let err = game.instantiate(1).unwrap_err();
    assert_eq!(err.object, "pot");
    assert!(err.reason.contains("unknown container"), "{}", err.reason);
}

#[test]
fn closed_container_hides_contents() {
    let game = small(
        "class Fridge : Container { isOpenable = true, isOpen = false }\n object fridge : Fridge in kitchen\n object milk : GameObject in fridge\n win false score 1",
    );
    let state = game.instantiate(0).unwrap();
    let actions = game.enumerate_valid_actions(&state).unwrap();
    assert!(actions.iter().all(|a| !a.contains("milk")), "{actions:?}");
    assert!(actions.contains(&"open fridge".to_string()));

    let (obs, opened) = game.step(&state, "open fridge").unwrap();
    assert_eq!(obs, "The fridge is now open.");
    let fridge = opened.find_by_name("fridge").unwrap();
    assert_eq!(opened.get(fridge).unwrap().prop("isOpen"), Some(&PropertyValue::Bool(true)));
    assert!(game.enumerate_valid_actions(&opened).unwrap().contains(&"take milk".to_string()));

    let (obs, again) = game.step(&opened, "open fridge").unwrap();
    assert_eq!(obs, "The fridge is already open.");
    assert_eq!(again.num_steps, opened.num_steps + 1);
    assert_eq!(
        canonical_serialize(&again, SerializeMode::Search),
        canonical_serialize(&opened, SerializeMode::Search)
    );
}

#[test]
fn unmatched_input_is_a_strict_no_op() {
    let game = load("boil-water");
    let state = game.instantiate(42).unwrap();
    let (obs, next) = game.step(&state, "dance wildly").unwrap();
    assert_eq!(obs, "I don't understand that.");
    assert_eq!(canonical_serialize(&next, SerializeMode::Full), canonical_serialize(&state, SerializeMode::Full));
}

#[test]
fn input_is_normalized() {
    let game = load("boil-water");
    let state = game.instantiate(42).unwrap();
    let (obs, _) = game.step(&state, "  OPEN   Cupboard ").unwrap();
    assert_eq!(obs, "The cupboard is now open.");
}

#[test]
fn boil_water_initial_actions() {
    let game = load("boil-water");
    let state = game.instantiate(42).unwrap();
    let actions = game.enumerate_valid_actions(&state).unwrap();
    assert!(actions.contains(&"turn on stove".to_string()));
    assert!(!actions.contains(&"take pot".to_string()), "pot starts in the closed cupboard");
    let (_, opened) = game.step(&state, "open cupboard").unwrap();
    let actions = game.enumerate_valid_actions(&opened).unwrap();
    assert!(actions.contains(&"take pot".to_string()));
    assert!(actions.contains(&"put pot in stove".to_string()), "grounding ignores preconditions");
}

#[test]
fn boil_water_golden_trace() {
    let game = load("boil-water");
    let state = game.instantiate(42).unwrap();
    let (_, s) = play(&game, &state, &["open cupboard", "take pot", "put pot in stove", "turn on stove"]);
    assert_eq!(real(&s, "water", "temperature"), 25.0);
    let (_, s) = play(&game, &s, &["wait", "wait"]);
    assert_eq!(real(&s, "water", "temperature"), 75.0);
    assert!(!s.game_won);
    let (obs, s) = play(&game, &s, &["wait"]);
    assert_eq!(real(&s, "water", "temperature"), 100.0);
    let water = s.find_by_name("water").unwrap();
    assert_eq!(s.get(water).unwrap().display_name().unwrap(), "steam");
    assert!(s.game_won && s.game_over, "{obs}");
    assert_eq!(s.score, s.max_score);
    assert_eq!(s.num_steps, 7);
    let (obs, after) = game.step(&s, "wait").unwrap();
    assert_eq!(obs, "The game is over.");
    assert!(after.game_won);
}

#[test]
fn descriptions_nest_open_containers() {
    let game = load("boil-water");
    let state = game.instantiate(42).unwrap();
    let (_, s) = play(&game, &state, &["open cupboard"]);
    let text = game.describe(&s).unwrap();
    assert!(text.contains("a cupboard (open, containing a pot (containing some water))"), "{text}");
    assert_eq!(text, game.describe(&s).unwrap());
    let closed = game.describe(&state).unwrap();
    assert!(closed.contains("a cupboard (closed)"), "{closed}");
}

#[test]
fn freezing_water_shows_solid_name() {
    let game = small(
        "class Water : Substance { temperature = -5.0, meltingPoint = 0.0, boilingPoint = 100.0, solidName = \"ice\", liquidName = \"water\", gasName = \"steam\" }\n object water : Water in kitchen\n win false score 1",
    );
    let state = game.instantiate(0).unwrap();
    let water = state.find_by_name("water").unwrap();
    assert_eq!(state.get(water).unwrap().display_name().unwrap(), "ice");
}

#[test]
fn serialization_modes_and_round_trip() {
    let game = load("boil-water");
    let state = game.instantiate(42).unwrap();
    let mut later = state.clone();
    later.num_steps = 5;
    assert_eq!(canonical_serialize(&state, SerializeMode::Search), canonical_serialize(&later, SerializeMode::Search));
    assert_ne!(canonical_serialize(&state, SerializeMode::Full), canonical_serialize(&later, SerializeMode::Full));
    let (_, opened) = game.step(&state, "open cupboard").unwrap();
    assert_ne!(canonical_serialize(&state, SerializeMode::Search), canonical_serialize(&opened, SerializeMode::Search));
    let bytes = canonical_serialize(&opened, SerializeMode::Full);
    assert_eq!(deserialize(&bytes).unwrap(), opened);
}

#[test]
fn boil_water_matches_golden_fixture() {
    let game = load("boil-water");
    let state = game.instantiate(42).unwrap();
    let bytes = canonical_serialize(&state, SerializeMode::Full);
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/boil-water.seed42.json");
    let golden = std::fs::read(path).expect("golden fixture present");
    assert_eq!(String::from_utf8(bytes).unwrap(), String::from_utf8(golden).unwrap().trim_end());
}

#[test]
fn destroyed_reference_is_a_runtime_fault() {
    let game = small(
        "object rock : GameObject in kitchen\n action \"smash {r:GameObject}\" { destroy r  set rock.isOpen = true }\n win false score 1",
    );
    let state = game.instantiate(0).unwrap();
    let err = game.step(&state, "smash rock").unwrap_err();
    assert_eq!(err.action, "smash rock");
    assert!(err.reason.contains("rock"), "{}", err.reason);
}
