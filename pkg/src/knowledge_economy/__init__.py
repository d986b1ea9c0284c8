"""Knowledge-hierarchy equilibrium solvers."""
