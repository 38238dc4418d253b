//! Plugging a new black-box simulator into behaviour planning.
//!
//! A courier walks a ring of six stops and must be home after exactly eight
//! moves. The behaviour space asks whether the route visited the market and
//! whether it ever went anticlockwise.
//!
//! Run with `cargo run --example custom_simulator`.

use std::collections::HashMap;

use divplan::bspace::{FeatureConfig, LtlValueConfig, SpaceConfig};
use divplan::fbi::fbi;
use divplan::ltl::{Alphabet, Valuation};
use divplan::search::{bind_sim, SearchConfig, SimBehaviourGenerator, SimPlanGenerator, Simulator};

const STOPS: u8 = 6;
const MARKET: u8 = 3;
const MOVES: usize = 8;

struct Courier {
    alphabet: Alphabet,
}

#[derive(Clone)]
struct Walk {
    at: u8,
    steps: usize,
    backwards: bool,
}

impl Simulator for Courier {
    type State = Walk;
    type Action = &'static str;
    type Digest = (u8, usize, bool);

    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn initial(&self) -> Walk {
        Walk {
            at: 0,
            steps: 0,
            backwards: false,
        }
    }

    fn legal_actions(&self, w: &Walk) -> Vec<&'static str> {
        if w.steps < MOVES {
            vec!["cw", "ccw", "wait"]
        } else {
            vec![]
        }
    }

    fn step(&self, w: &Walk, action: &&'static str) -> Option<Walk> {
        let at = match *action {
            "cw" => (w.at + 1) % STOPS,
            "ccw" => (w.at + STOPS - 1) % STOPS,
            _ => w.at,
        };
        Some(Walk {
            at,
            steps: w.steps + 1,
            backwards: w.backwards || *action == "ccw",
        })
    }

    fn propositions(&self, w: &Walk) -> Valuation {
        Valuation::from_bools(vec![w.at == MARKET, w.backwards])
    }

    fn is_goal(&self, w: &Walk) -> bool {
        w.steps == MOVES && w.at == 0
    }

    fn budget(&self) -> Option<usize> {
        Some(MOVES)
    }

    fn digest(&self, w: &Walk) -> (u8, usize, bool) {
        (w.at, w.steps, w.backwards)
    }
}

fn two_way(name: &str, yes: &str, no: &str) -> FeatureConfig {
    FeatureConfig::Ltl {
        name: name.into(),
        values: vec![
            LtlValueConfig {
                label: "yes".into(),
                formula: yes.into(),
            },
            LtlValueConfig {
                label: "no".into(),
                formula: no.into(),
            },
        ],
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sim = Courier {
        alphabet: Alphabet::new(["market", "backwards"]),
    };
    let config = SpaceConfig {
        features: vec![
            two_way("market", "F market", "G !market"),
            two_way("anticlockwise", "F backwards", "G !backwards"),
        ],
    };
    let space = bind_sim(&config, sim.alphabet(), &HashMap::new())?;
    let cfg = SearchConfig::default();
    let mut behaviours = SimBehaviourGenerator::new(&sim, &space, cfg.clone())?;
    let mut plans = SimPlanGenerator::new(&sim, cfg);
    let result = fbi(5, &space, &mut behaviours, &mut plans)?;
    for (trace, b) in result.plans.iter().zip(&result.behaviours) {
        println!("{b}  {}", trace.plan.join(" "));
    }
    println!("bdc = {} of {} cells", result.bdc, space.size().unwrap_or(0));
    for o in behaviours.outcomes() {
        println!("  {} {:?}", o.cell, o.status);
    }
    Ok(())
}
