"""Error metrics, property checks, reference traces and the acceptance suite."""
