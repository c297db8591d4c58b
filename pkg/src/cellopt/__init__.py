"""Joint transmit-power and cell on/off energy minimization for
heterogeneous cellular networks: exact system model, linear
inner-approximation MILP, bundled solver, baselines and sweep harness."""

__version__ = "0.1.0"
