"""Hall-Littlewood branching graphs, exact p-adic random matrix laws, and a
Monte Carlo simulator that checks them."""

__version__ = "0.1.0"
