"""Regenerate tests/golden/ (run only after an intentional netlist change)."""

from pathlib import Path

from sramyield.circuit_model import default_config
from sramyield.netlist import DeckKind, emit_array, emit_deck

GOLDEN = Path(__file__).parent / "golden"


def golden_set() -> dict[str, str]:
    cfg = default_config(32, 1)
    out = {"array_32x1.sp": emit_array(cfg).text}
    for kind in DeckKind:
        out[f"{kind.value}_32x1.sp"] = emit_deck(cfg, kind).text
    return out


if __name__ == "__main__":
    GOLDEN.mkdir(exist_ok=True)
    for name, text in golden_set().items():
        (GOLDEN / name).write_bytes(text.encode("utf-8"))
        print(name)
