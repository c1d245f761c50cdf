"""
Solver Configuration Modules
============================
Each module defines tunable constants for one concern of the solver.
"""
