use serde_json::{json, Map, Value};
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PeCounters {
    pub msgs_sent: u64,
    pub msgs_received: u64,
    pub bytes_sent: u64,
    pub bytes_received: u64,
}

impl PeCounters {
    fn add(&mut self, o: &PeCounters) {
        self.msgs_sent += o.msgs_sent;
        self.msgs_received += o.msgs_received;
        self.bytes_sent += o.bytes_sent;
        self.bytes_received += o.bytes_received;
    }

    fn to_json(self) -> Value {
        json!({
            "msgs_sent": self.msgs_sent,
            "msgs_received": self.msgs_received,
            "bytes_sent": self.bytes_sent,
            "bytes_received": self.bytes_received,
        })
    }
}

/// Counters of one named phase.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PhaseLedger {
    pub supersteps: u64,
    /// Largest number of messages any PE sent within a single superstep.
    pub max_msgs_sent_step: u64,
    pub max_msgs_received_step: u64,
    pub pes: Vec<PeCounters>,
}

impl PhaseLedger {
    fn new(p: usize) -> Self {
        PhaseLedger { pes: vec![PeCounters::default(); p], ..Default::default() }
    }

    pub fn totals(&self) -> PeCounters {
        let mut t = PeCounters::default();
        for c in &self.pes {
            t.add(c);
        }
        t
    }

    pub fn max_msgs_sent(&self) -> u64 {
        self.pes.iter().map(|c| c.msgs_sent).max().unwrap_or(0)
    }

    pub fn max_msgs_received(&self) -> u64 {
        self.pes.iter().map(|c| c.msgs_received).max().unwrap_or(0)
    }
}

/// Per-phase, per-PE message and byte accounting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommLedger {
    p: usize,
    phases: BTreeMap<String, PhaseLedger>,
}

impl CommLedger {
    pub fn new(p: usize) -> Self {
        CommLedger { p, phases: BTreeMap::new() }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn phase(&self, name: &str) -> Option<&PhaseLedger> {
        self.phases.get(name)
    }

    pub fn phases(&self) -> impl Iterator<Item = (&str, &PhaseLedger)> {
        self.phases.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Phases whose name starts with `prefix`, in name order.
    pub fn phases_with_prefix<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = (&'a str, &'a PhaseLedger)> {
        self.phases().filter(move |(k, _)| k.starts_with(prefix))
    }

    pub fn totals(&self) -> PeCounters {
        let mut t = PeCounters::default();
        for ph in self.phases.values() {
            t.add(&ph.totals());
        }
        t
    }

    pub fn total_supersteps(&self) -> u64 {
        self.phases.values().map(|p| p.supersteps).sum()
    }

    pub(crate) fn step(&mut self, phase: &str, sent: &[u64], received: &[u64]) {
        let p = self.p;
        let ph = self.phases.entry(phase.to_string()).or_insert_with(|| PhaseLedger::new(p));
        ph.supersteps += 1;
        ph.max_msgs_sent_step = ph.max_msgs_sent_step.max(sent.iter().copied().max().unwrap_or(0));
        ph.max_msgs_received_step = ph.max_msgs_received_step.max(received.iter().copied().max().unwrap_or(0));
    }

    pub(crate) fn record(&mut self, phase: &str, src: usize, dst: usize, bytes: usize) {
        let p = self.p;
        let ph = self.phases.entry(phase.to_string()).or_insert_with(|| PhaseLedger::new(p));
        ph.pes[src].msgs_sent += 1;
        ph.pes[src].bytes_sent += bytes as u64;
        ph.pes[dst].msgs_received += 1;
        ph.pes[dst].bytes_received += bytes as u64;
    }

    pub fn to_json(&self) -> Value {
        let mut phases = Map::new();
        for (name, ph) in &self.phases {
            let pes: Map<String, Value> =
                ph.pes.iter().enumerate().map(|(i, c)| (i.to_string(), c.to_json())).collect();
            phases.insert(
                name.clone(),
                json!({
                    "supersteps": ph.supersteps,
                    "max_msgs_sent_step": ph.max_msgs_sent_step,
                    "max_msgs_received_step": ph.max_msgs_received_step,
                    "totals": ph.totals().to_json(),
                    "pes": pes,
                }),
            );
        }
        json!({ "p": self.p, "phases": phases })
    }
}
