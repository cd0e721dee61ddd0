//! Finite automata over bit strings and fixed-length wildcard pattern sets.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::obdd::{build_layered, check_payload, Qrobdd, FALSE, TRUE};

/// A total deterministic automaton over `{0, 1}` whose states carry output
/// payloads.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfa {
    transitions: Vec<[u32; 2]>,
    initial: u32,
    accept: Vec<Vec<u8>>,
}

impl Dfa {
    /// `transitions[s] = [next on 0, next on 1]`; `accept[s]` is the payload
    /// of a run ending in state `s`.
    pub fn new(transitions: Vec<[u32; 2]>, initial: u32, accept: Vec<Vec<u8>>) -> Result<Self> {
        let states = transitions.len();
        if states == 0 {
            return Err(Error::InvalidPredicate("automaton has no states".into()));
        }
        if accept.len() != states {
            return Err(Error::InvalidPredicate(format!(
                "{} acceptance entries for {states} states",
                accept.len()
            )));
        }
        if initial as usize >= states || transitions.iter().flatten().any(|&t| t as usize >= states)
        {
            return Err(Error::InvalidPredicate(
                "transition to unknown state".into(),
            ));
        }
        for p in &accept {
            check_payload(p)?;
        }
        Ok(Self {
            transitions,
            initial,
            accept,
        })
    }

    pub fn state_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn initial(&self) -> u32 {
        self.initial
    }

    pub fn transitions(&self) -> &[[u32; 2]] {
        &self.transitions
    }

    pub fn accept(&self) -> &[Vec<u8>] {
        &self.accept
    }

    pub fn step(&self, state: u32, bit: bool) -> u32 {
        self.transitions[state as usize][bit as usize]
    }

    /// Payload of the state reached after reading `bits`.
    pub fn run<I: IntoIterator<Item = bool>>(&self, bits: I) -> &[u8] {
        let end = bits.into_iter().fold(self.initial, |s, b| self.step(s, b));
        &self.accept[end as usize]
    }
}

/// Unrolls `dfa` over `n` input bits.
pub fn compile_dfa(dfa: &Dfa, n: usize) -> Result<Qrobdd> {
    let q = build_layered(
        n,
        dfa.initial,
        |_, &s, bit| dfa.step(s, bit),
        |&s| dfa.accept[s as usize].clone(),
    )?;
    Ok(q.reduce())
}

/// A fixed-length pattern; `None` positions match either bit.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WildcardPattern(pub Vec<Option<bool>>);

impl WildcardPattern {
    /// Parses `0`, `1` and `*` characters.
    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(Some(false)),
                '1' => Ok(Some(true)),
                '*' => Ok(None),
                other => Err(Error::InvalidPredicate(format!(
                    "pattern character {other:?} is not 0, 1 or *"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(WildcardPattern)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn matches<I: IntoIterator<Item = bool>>(&self, bits: I) -> bool {
        let mut count = 0;
        for (p, b) in self.0.iter().zip(bits) {
            count += 1;
            if matches!(p, Some(want) if *want != b) {
                return false;
            }
        }
        count == self.0.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum SubsetState {
    /// No pattern survives.
    Dead,
    /// All `n` bits read with at least one surviving pattern.
    Accepted,
    /// `pos` bits read; indices of the patterns still matching.
    Reading { pos: usize, alive: BTreeSet<usize> },
}

/// Builds the subset automaton accepting exactly the length-`n` strings
/// matched by some pattern. Longer strings are rejected.
pub fn wildcard_set_to_dfa(patterns: &[WildcardPattern], n: usize) -> Result<Dfa> {
    if let Some(p) = patterns.iter().find(|p| p.len() != n) {
        return Err(Error::InvalidPredicate(format!(
            "pattern of length {} in a length-{n} set",
            p.len()
        )));
    }
    let canonical = |pos: usize, alive: BTreeSet<usize>| {
        if alive.is_empty() {
            SubsetState::Dead
        } else if pos == n {
            SubsetState::Accepted
        } else {
            SubsetState::Reading { pos, alive }
        }
    };

    let start = canonical(0, (0..patterns.len()).collect());
    let mut ids: HashMap<SubsetState, u32> = HashMap::new();
    let mut states: Vec<SubsetState> = Vec::new();
    let mut intern = |s: SubsetState, states: &mut Vec<SubsetState>| {
        *ids.entry(s.clone()).or_insert_with(|| {
            states.push(s);
            (states.len() - 1) as u32
        })
    };
    intern(start, &mut states);

    let mut transitions = Vec::new();
    let mut next_unexpanded = 0;
    while next_unexpanded < states.len() {
        let s = states[next_unexpanded].clone();
        next_unexpanded += 1;
        let targets = [false, true].map(|bit| match &s {
            SubsetState::Dead | SubsetState::Accepted => SubsetState::Dead,
            SubsetState::Reading { pos, alive } => canonical(
                pos + 1,
                alive
                    .iter()
                    .copied()
                    .filter(|&k| patterns[k].0[*pos].is_none_or(|want| want == bit))
                    .collect(),
            ),
        });
        let [lo, hi] = targets.map(|t| intern(t, &mut states));
        transitions.push([lo, hi]);
    }
    let accept = states
        .iter()
        .map(|s| {
            if *s == SubsetState::Accepted {
                TRUE
            } else {
                FALSE
            }
            .to_vec()
        })
        .collect();
    Dfa::new(transitions, 0, accept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::obdd::InputWord;

    fn parity() -> Dfa {
        Dfa::new(vec![[0, 1], [1, 0]], 0, vec![FALSE.to_vec(), TRUE.to_vec()]).unwrap()
    }

    #[test]
    fn accept_all_is_constant_true() {
        let d = Dfa::new(vec![[0, 0]], 0, vec![TRUE.to_vec()]).unwrap();
        let q = compile_dfa(&d, 5).unwrap();
        assert_eq!(q, Qrobdd::constant(5, TRUE).unwrap());
    }

    #[test]
    fn parity_matches_xor() {
        let q = compile_dfa(&parity(), 8).unwrap();
        for k in 0..256u64 {
            let want = k.count_ones() % 2 == 1;
            assert_eq!(q.evaluate_u64(k).unwrap() == TRUE, want);
        }
        assert_eq!(q.level_sizes(), vec![1, 2, 2, 2, 2, 2, 2, 2]);
    }

    #[test]
    fn dfa_validation() {
        assert!(Dfa::new(vec![], 0, vec![]).is_err());
        assert!(Dfa::new(vec![[0, 2]], 0, vec![TRUE.to_vec()]).is_err());
        assert!(Dfa::new(vec![[0, 0]], 1, vec![TRUE.to_vec()]).is_err());
        assert!(Dfa::new(vec![[0, 0]], 0, vec![vec![]]).is_err());
        assert!(Dfa::new(vec![[0, 0]], 0, vec![]).is_err());
    }

    #[test]
    fn all_wildcards_accept_everything() {
        let p = WildcardPattern::parse("****").unwrap();
        let d = wildcard_set_to_dfa(&[p], 4).unwrap();
        for k in 0..16 {
            let x = InputWord::from_u64(k, 4).unwrap();
            assert_eq!(d.run(x.bits()), TRUE);
        }
    }

    #[test]
    fn two_patterns_accept_seven() {
        let ps: Vec<_> = ["01**", "**10"]
            .iter()
            .map(|s| WildcardPattern::parse(s).unwrap())
            .collect();
        let d = wildcard_set_to_dfa(&ps, 4).unwrap();
        let mut accepted = 0;
        for k in 0..16 {
            let x = InputWord::from_u64(k, 4).unwrap();
            let direct = ps.iter().any(|p| p.matches(x.bits()));
            assert_eq!(d.run(x.bits()) == TRUE, direct);
            accepted += direct as usize;
        }
        assert_eq!(accepted, 7);
    }

    #[test]
    fn empty_pattern_list_accepts_nothing() {
        let d = wildcard_set_to_dfa(&[], 3).unwrap();
        let q = compile_dfa(&d, 3).unwrap();
        assert_eq!(q, Qrobdd::constant(3, FALSE).unwrap());
    }

    #[test]
    fn inconsistent_lengths_rejected() {
        let ps = [
            WildcardPattern::parse("01").unwrap(),
            WildcardPattern::parse("011").unwrap(),
        ];
        assert!(wildcard_set_to_dfa(&ps, 2).is_err());
        assert!(WildcardPattern::parse("01x").is_err());
    }

    #[test]
    fn longer_runs_rejected() {
        let d = wildcard_set_to_dfa(&[WildcardPattern::parse("1").unwrap()], 1).unwrap();
        assert_eq!(d.run([true]), TRUE);
        assert_eq!(d.run([true, false]), FALSE);
    }
}
