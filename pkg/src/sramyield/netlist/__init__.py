"""SPICE netlist and Monte Carlo table emission."""

from .emit import (
    CELL_SUBCKT,
    DeckKind,
    DeckOptions,
    NetlistDocument,
    emit_array,
    emit_cell_subckt,
    emit_deck,
    variation_parameter_count,
)
from .parse import ParsedNetlist, parse_netlist
from .tables import emit_mc_tables, read_mc_tables, write_text

__all__ = [
    "CELL_SUBCKT", "DeckKind", "DeckOptions", "NetlistDocument", "ParsedNetlist", "emit_array",
    "emit_cell_subckt", "emit_deck", "emit_mc_tables", "parse_netlist", "read_mc_tables",
    "variation_parameter_count", "write_text",
]
