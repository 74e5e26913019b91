"""Darkit: a workbench for spiking language model development.

Core capabilities: SpikeDef parsing with span-exact indexing, hierarchical
module tree extraction, validated code patching, flow-graph compilation,
a checksummed plugin registry, tuning-command generation, and durable
real-time run tracking. Served over HTTP by :mod:`darkit.api` and from the
terminal by :mod:`darkit.cli`.
"""

__version__ = "0.1.0"
