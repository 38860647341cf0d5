"""Temperature-dependent weak-coupling corrections for 1D model systems."""
