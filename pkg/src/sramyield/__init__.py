"""SRAM array netlist generation, rare-event yield estimation and cell sizing optimization."""

__version__ = "0.1.0"
