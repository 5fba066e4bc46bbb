// Scratch probe: acceptance-trend dry run over the bundled suite.
use foresight_core::harness::{
    collision_rate_pct, mean_nns, mean_refinements, run_suite, RunOptions,
};
use foresight_core::metrics::aggregate_suite;
use foresight_core::select::SelectorKind;
use foresight_core::world::suite::default_suite;
use foresight_core::world::{Category, Mode};

fn main() {
    let suite = default_suite();
    let opts = RunOptions::default();

    for mode in [Mode::AgentOnly, Mode::Imagine] {
        let start = std::time::Instant::now();
        let (outcomes, rejects) = run_suite(&suite, mode, &opts).unwrap();
        let summary = aggregate_suite(&outcomes).unwrap();
        println!(
            "== mode {:?} rejects {} elapsed {:?}",
            mode,
            rejects.len(),
            start.elapsed()
        );
        for row in &summary.rows {
            println!(
                "  {:<11} n={:2} col%={:6.2} nns={:.3}",
                row.label, row.scenarios, row.collision_rate_pct, row.mean_nns
            );
        }
        println!("  mean refinements: {:.3}", mean_refinements(&outcomes));
        let _ = (collision_rate_pct(&outcomes), mean_nns(&outcomes));
    }

    // ESS on/off comparison (imagine mode, directional selection).
    for ess in [true, false] {
        let mut opts = RunOptions::default();
        opts.loop_config.ess_enabled = ess;
        let (outcomes, _) = run_suite(&suite, Mode::Imagine, &opts).unwrap();
        println!(
            "ESS {}: col%={:.2} mean_refinements={:.3}",
            ess,
            collision_rate_pct(&outcomes),
            mean_refinements(&outcomes)
        );
    }

    // Selector comparison (imagine mode, ESS+TSS on).
    for selector in [
        SelectorKind::Directional,
        SelectorKind::SmoothSel,
        SelectorKind::SoftMin,
        SelectorKind::MaxCons,
    ] {
        let mut opts = RunOptions::default();
        opts.loop_config.selector = selector;
        let (outcomes, _) = run_suite(&suite, Mode::Imagine, &opts).unwrap();
        let per_cat = |cat: Category| {
            let sub: Vec<_> = outcomes
                .iter()
                .filter(|o| o.category == cat)
                .cloned()
                .collect();
            collision_rate_pct(&sub)
        };
        println!(
            "selector {:<12} col%={:6.2} (stat {:5.1} frontal {:5.1} side {:5.1}) refinements {:.2}",
            selector.name(),
            collision_rate_pct(&outcomes),
            per_cat(Category::Stationary),
            per_cat(Category::Frontal),
            per_cat(Category::Side),
            mean_refinements(&outcomes)
        );
    }
}
