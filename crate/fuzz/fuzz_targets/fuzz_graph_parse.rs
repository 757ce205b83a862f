#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(graph) = openxor::fixpoint::Graph::parse(text) {
            // parsed graphs must be safe to run the demos on
            if graph.vertex_count <= 64 && graph.edges.len() <= 256 {
                let _ = openxor::fixpoint::bellman_ford(&graph, 0);
                let _ = openxor::fixpoint::bfs_reach(&graph, 0);
            }
        }
    }
});
