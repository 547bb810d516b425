"""Named benchmark runs with their embedded checks."""
