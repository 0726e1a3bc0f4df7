"""Independent reference computations whose outputs are frozen under tests/golden."""
