"""
epitrace
========
SIR dynamics with asymptomatic cases, contact tracing and isolation:
degree-based ODE systems, stability analysis, contact-graph statistics and
agent-based simulation.
"""

__version__ = "1.0.0"
