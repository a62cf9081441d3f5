use deskclean::plan::Plan;
use deskclean::planner::{MemoryBuffer, MemoryEntry, MEMORY_CAPACITY};

fn entry(cycle: u32) -> MemoryEntry {
    MemoryEntry {
        cycle,
        plan: Plan {
            plan_id: format!("p{cycle}"),
            steps: vec![],
            created_at: cycle,
        },
        outcomes: vec![],
        failure: None,
        scene_digest: String::new(),
    }
}

/// After every push the buffer holds exactly the last five cycles, oldest first.
pub fn check_fifo(cycles: &[u32]) -> Result<(), String> {
    let mut mem = MemoryBuffer::new();
    if mem.capacity() != 5 {
        return Err(format!("capacity {}", mem.capacity()));
    }
    for (i, &c) in cycles.iter().enumerate() {
        mem.push(entry(c));
        let seen = &cycles[..=i];
        let expected = &seen[seen.len().saturating_sub(MEMORY_CAPACITY)..];
        let got: Vec<u32> = mem.iter().map(|e| e.cycle).collect();
        if got != expected || mem.len() != expected.len() {
            return Err(format!("after {seen:?} buffer holds {got:?}"));
        }
    }
    if mem.is_empty() != cycles.is_empty() {
        return Err("is_empty disagrees with len".into());
    }
    Ok(())
}
