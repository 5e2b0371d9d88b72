"""FOL reasoning-trace factory: formulas, rewrite engine, rule catalog, oracle, datasets and diagnostics."""
