use std::fmt;
use std::ops::AddAssign;

/// Exact event counts of one kernel run. Loads and stores count elements.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct EventCounters {
    pub global_loads_a: u64,
    pub global_loads_b: u64,
    pub global_loads_c: u64,
    pub global_stores: u64,
    pub scratch_loads: u64,
    pub scratch_stores: u64,
    pub operator_invocations: u64,
    /// Real block multiplies issued by the operator (4 per complex call).
    pub real_block_multiplies: u64,
    pub inner_iterations_executed: u64,
    pub inner_iterations_skipped: u64,
}

impl EventCounters {
    pub fn global_loads(&self) -> u64 {
        self.global_loads_a + self.global_loads_b + self.global_loads_c
    }

    pub fn rows(&self) -> [(&'static str, u64); 11] {
        [
            ("global_loads_a", self.global_loads_a),
            ("global_loads_b", self.global_loads_b),
            ("global_loads_c", self.global_loads_c),
            ("global_loads", self.global_loads()),
            ("global_stores", self.global_stores),
            ("scratch_loads", self.scratch_loads),
            ("scratch_stores", self.scratch_stores),
            ("operator_invocations", self.operator_invocations),
            ("real_block_multiplies", self.real_block_multiplies),
            ("inner_iterations_executed", self.inner_iterations_executed),
            ("inner_iterations_skipped", self.inner_iterations_skipped),
        ]
    }
}

impl AddAssign for EventCounters {
    fn add_assign(&mut self, o: Self) {
        self.global_loads_a += o.global_loads_a;
        self.global_loads_b += o.global_loads_b;
        self.global_loads_c += o.global_loads_c;
        self.global_stores += o.global_stores;
        self.scratch_loads += o.scratch_loads;
        self.scratch_stores += o.scratch_stores;
        self.operator_invocations += o.operator_invocations;
        self.real_block_multiplies += o.real_block_multiplies;
        self.inner_iterations_executed += o.inner_iterations_executed;
        self.inner_iterations_skipped += o.inner_iterations_skipped;
    }
}

impl fmt::Display for EventCounters {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, v) in self.rows() {
            writeln!(f, "{name:<27}{v:>14}")?;
        }
        Ok(())
    }
}
