//! Scenarios shipped with the binary.

use serde::Serialize;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Bundled {
    pub name: &'static str,
    /// Topic the scenario reproduces.
    pub topic: &'static str,
    #[serde(skip)]
    pub source: &'static str,
}

pub const CATALOG: &[Bundled] = &[
    Bundled {
        name: "spin-bernoulli",
        topic: "statistical reversibility: precessing spin measured every quarter period",
        source: include_str!("../scenarios/spin-bernoulli.json"),
    },
    Bundled {
        name: "mz-reversal-n3",
        topic: "statistical reversibility: reversal theorem and dimension detailed balance",
        source: include_str!("../scenarios/mz-reversal-n3.json"),
    },
    Bundled {
        name: "abl-trivial",
        topic: "two-time conditioning of intermediate outcomes",
        source: include_str!("../scenarios/abl-trivial.json"),
    },
    Bundled {
        name: "two-spin-retro",
        topic: "retrodiction with two spins",
        source: include_str!("../scenarios/two-spin-retro.json"),
    },
    Bundled {
        name: "markov-2state",
        topic: "statistical reversibility of Markov chains",
        source: include_str!("../scenarios/markov-2state.json"),
    },
    Bundled {
        name: "freemotion-db",
        topic: "mechanical reversibility and macrostate detailed balance",
        source: include_str!("../scenarios/freemotion-db.json"),
    },
    Bundled {
        name: "entropy-flow-n6",
        topic: "thermodynamic irreversibility",
        source: include_str!("../scenarios/entropy-flow-n6.json"),
    },
];

pub fn find(name: &str) -> Option<&'static Bundled> {
    CATALOG.iter().find(|b| b.name == name)
}
