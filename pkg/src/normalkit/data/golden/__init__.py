"""Golden iteration-count tables (YAML)."""
