use proptest::prelude::*;

use worldforge_core::corpus::{list_corpus, load};
use worldforge_core::dsl::ast::{BinOp, Expr, ExprKind, Literal, Quantifier, Span};
use worldforge_core::dsl::eval::eval_expr;
use worldforge_core::dsl::{check, parse, print, GameDef};
use worldforge_core::engine::{canonical_serialize, Game, GameState, SerializeMode, SubstanceState};
use worldforge_core::spec::normalize_name;
use worldforge_core::stats::context_fit;

const CORPUS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../corpus");

fn corpus_games() -> Vec<Game> {
    list_corpus(CORPUS).unwrap().into_iter().map(|e| Game::new(load(e).unwrap().def)).collect()
}

thread_local! {
    static GAMES: Vec<Game> = corpus_games();
}

fn e(kind: ExprKind) -> Expr {
    Expr::new(kind, Span::new(1, 1))
}

fn leaf() -> impl Strategy<Value = Expr> {
    let ident = prop::sample::select(vec!["a", "pot", "w", "stove_2"]);
    let prop_name = prop::sample::select(vec!["isOn", "temperature", "x"]);
    prop_oneof![
        any::<bool>().prop_map(|b| e(ExprKind::Literal(Literal::Bool(b)))),
        (-1000i64..1000).prop_map(|n| e(ExprKind::Literal(Literal::Int(n)))),
        (-800i32..800).prop_map(|k| e(ExprKind::Literal(Literal::Real(k as f64 / 8.0)))),
        "[a-z \"\\\\]{0,6}".prop_map(|s| e(ExprKind::Literal(Literal::Text(s)))),
        ident.clone().prop_map(|s| e(ExprKind::Ident(s.into()))),
        (ident.clone(), prop_name).prop_map(|(o, p)| e(ExprKind::Prop { object: o.into(), property: p.into() })),
        (ident.clone(), ident).prop_map(|(a, b)| e(ExprKind::In { inner: a.into(), outer: b.into() })),
    ]
}

fn is_literal(x: &Expr) -> bool {
    matches!(x.kind, ExprKind::Literal(_))
}

fn expr_strategy() -> impl Strategy<Value = Expr> {
    let ops = vec![
        BinOp::Or,
        BinOp::And,
        BinOp::Eq,
        BinOp::Ne,
        BinOp::Lt,
        BinOp::Le,
        BinOp::Gt,
        BinOp::Ge,
        BinOp::Add,
        BinOp::Sub,
        BinOp::Mul,
        BinOp::Div,
    ];
    leaf().prop_recursive(4, 32, 2, move |inner| {
        prop_oneof![
            (prop::sample::select(ops.clone()), inner.clone(), inner.clone())
                .prop_map(|(op, l, r)| e(ExprKind::Binary { op, lhs: Box::new(l), rhs: Box::new(r) })),
            inner.clone().prop_map(|x| e(ExprKind::Not(Box::new(x)))),
            // Negated literals are folded by the parser, so only non-literals get a Neg node.
            inner.clone().prop_filter("non-literal", |x| !is_literal(x)).prop_map(|x| e(ExprKind::Neg(Box::new(x)))),
            (any::<bool>(), inner).prop_map(|(ex, body)| e(ExprKind::Quant {
                quantifier: if ex { Quantifier::Exists } else { Quantifier::Forall },
                var: "v".into(),
                class: "Water".into(),
                body: Box::new(body),
            })),
        ]
    })
}

fn world_bytes(state: &GameState) -> Vec<u8> {
    canonical_serialize(state, SerializeMode::Search)
}

fn full_bytes(state: &GameState) -> Vec<u8> {
    canonical_serialize(state, SerializeMode::Full)
}

/// Built-in failure answers all use one of these phrasings.
fn is_builtin_failure(obs: &str) -> bool {
    ["You already have", "cannot be", "You are not holding", "You cannot put", " is closed.", " is already "]
        .iter()
        .any(|p| obs.contains(p))
}

fn is_failure(def: &GameDef, obs: &str) -> bool {
    is_builtin_failure(obs)
        || obs == "You can't do that."
        || def.actions.iter().any(|a| a.failure.as_deref() == Some(obs))
}

fn substances_agree(state: &GameState) -> bool {
    state.objects.values().filter(|o| o.is_substance()).all(|o| {
        let t = o.prop("temperature").unwrap().as_real().unwrap();
        let m = o.prop("meltingPoint").unwrap().as_real().unwrap();
        let b = o.prop("boilingPoint").unwrap().as_real().unwrap();
        let key = if t < m {
            "solidName"
        } else if t < b {
            "liquidName"
        } else {
            "gasName"
        };
        let expected = match o.prop(key) {
            Some(worldforge_core::engine::PropertyValue::Text(s)) => s.clone(),
            _ => return false,
        };
        o.display_name().unwrap() == expected && o.substance_state().unwrap() == SubstanceState::classify(t, m, b)
    })
}

proptest! {
    #[test]
    fn normalize_name_is_idempotent(s in "\\PC{0,24}") {
        let once = normalize_name(&s);
        prop_assert_eq!(normalize_name(&once), once);
    }

    #[test]
    fn normalize_name_ascii_idempotent(s in "[A-Za-z_ !-]{0,24}") {
        let once = normalize_name(&s);
        prop_assert_eq!(normalize_name(&once), once);
    }

    #[test]
    fn printed_expressions_reparse(x in expr_strategy()) {
        let src = format!("game \"g\" {{ win {} score 1 }}", worldforge_core::dsl::printer::expr(&x));
        let def = parse(&src).map_err(|d| TestCaseError::fail(format!("{src}: {d:?}")))?;
        prop_assert_eq!(&def.wins[0].expr, &x, "{}", src);
        let printed = print(&def);
        prop_assert_eq!(parse(&printed).unwrap(), def);
    }

    #[test]
    fn context_fit_is_monotone(c in 0u64..1_000_000, extra in 0u64..100_000, p in 0u64..1000, g in 1u64..20_000, dg in 0u64..5000) {
        prop_assume!(p <= c);
        let base = context_fit(c, p, g).unwrap();
        prop_assert!(context_fit(c + extra, p, g).unwrap() >= base);
        prop_assert!(context_fit(c, p, g + dg).unwrap() <= base);
        prop_assert_eq!(base, (c - p) / g);
    }

    #[test]
    fn random_walks_keep_engine_invariants(game_ix in 0usize..8, picks in prop::collection::vec(any::<u16>(), 0..14), seed in any::<u64>()) {
        GAMES.with(|games| -> Result<(), TestCaseError> {
            let game = &games[game_ix % games.len()];
            let mut state = game.instantiate(seed).unwrap();
            let mut won = state.game_won;
            for pick in picks {
                let actions = game.enumerate_valid_actions(&state).unwrap();
                let action = &actions[pick as usize % actions.len()];

                // Unmatched input changes nothing at all.
                let (obs, same) = game.step(&state, "xyzzy plugh").unwrap();
                prop_assert_eq!(obs, "I don't understand that.");
                prop_assert_eq!(full_bytes(&same), full_bytes(&state));

                let Ok((obs, next)) = game.step(&state, action) else { break };
                // Determinism.
                let (obs2, next2) = game.step(&state, action).unwrap();
                prop_assert_eq!(&obs, &obs2);
                prop_assert_eq!(full_bytes(&next), full_bytes(&next2));

                if !state.game_over && is_failure(game.def(), &obs) {
                    prop_assert_eq!(world_bytes(&next), world_bytes(&state), "{}", action);
                    prop_assert_eq!(next.num_steps, state.num_steps + 1);
                }
                prop_assert!(next.check_tree().is_ok());
                prop_assert!(substances_agree(&next));
                prop_assert!(next.score <= next.max_score);
                prop_assert!(!next.game_won || next.game_over);
                prop_assert!(!won || next.game_won);
                won = next.game_won;

                // Expression evaluation leaves the state untouched.
                let before = full_bytes(&next);
                for w in &game.def().wins {
                    let _ = eval_expr(game, &next, &w.expr, &Vec::new());
                }
                prop_assert_eq!(full_bytes(&next), before);
                state = next;
            }
            Ok(())
        })?;
    }
}

#[test]
fn corpus_games_parse_for_walks() {
    assert_eq!(corpus_games().len(), 8);
    assert!(check("game \"g\" { task \"t\" room r win true score 1 }").is_ok());
}
