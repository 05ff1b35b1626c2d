"""Safety model checking of AIGER transition systems.

Engines: k-induction-guided trace extension (``kavy``), its fixed-choice
variant (``vanilla``), PDR, k-induction and BMC, all on a proof-logging CDCL
solver with sequence interpolation.
"""

__version__ = "0.1.0"
