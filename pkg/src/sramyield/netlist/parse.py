"""Minimal SPICE reader used to cross-check emitted netlists.

Understands the subset the emitter writes: comments, ``+`` continuations,
``.SUBCKT/.ENDS`` blocks, ``.PARAM`` lines and M/R/C/V/X element cards.
Hierarchy is flattened by recursive instance expansion to count devices.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field

_RC_NAME = re.compile(r"^R(BL|BLB|WL)_", re.IGNORECASE)


@dataclass
class Subckt:
    name: str
    ports: list[str]
    params: dict[str, str]
    elements: list[list[str]] = field(default_factory=list)


@dataclass
class ParsedNetlist:
    subckts: dict[str, Subckt]
    top: list[list[str]]
    params: dict[str, str]
    directives: list[list[str]]

    def flat_counts(self) -> Counter:
        """Element counts by leading letter after flattening the hierarchy."""
        memo: dict[str, Counter] = {}

        def count(elements, stack=()):
            total = Counter()
            for el in elements:
                kind = el[0][0].upper()
                if kind == "X":
                    sub = instance_subckt(el)
                    if sub in stack:
                        raise ValueError(f"recursive subcircuit {sub}")
                    if sub not in memo:
                        memo[sub] = count(self.subckts[sub].elements, stack + (sub,))
                    total += memo[sub]
                    total["X"] += 1
                else:
                    total[kind] += 1
            return total

        return count(self.top)

    def rc_segments(self) -> int:
        return sum(1 for el in self.top if _RC_NAME.match(el[0]))

    def top_nodes(self) -> list[str]:
        nodes = set()
        for el in self.top:
            nodes.update(element_nodes(el))
        nodes.discard("0")
        return sorted(nodes)

    def instance_params(self, subckt: str) -> list[dict[str, str]]:
        return [split_params(el)[1] for el in self.top
                if el[0][0].upper() == "X" and instance_subckt(el).upper() == subckt.upper()]

    def manifest(self) -> dict:
        counts = self.flat_counts()
        core = 0
        for el in self.top:
            if el[0][0].upper() == "X" and instance_subckt(el).upper() == "SRAM_6T_CELL":
                core += 6
        return {
            "n_transistors": counts["M"],
            "n_core_transistors": core,
            "n_subckts": len(self.subckts),
            "n_instances": counts["X"],
            "n_resistors": counts["R"],
            "n_capacitors": counts["C"],
            "n_rc_segments": self.rc_segments(),
            "node_names": self.top_nodes(),
        }


def logical_lines(text: str) -> list[str]:
    out: list[str] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("*"):
            continue
        if line.startswith("+") and out:
            out[-1] += " " + line[1:].strip()
        else:
            out.append(line)
    return out


def tokenize(line: str) -> list[str]:
    # keep {...} and (...) groups intact; drop spaces around '='
    line = re.sub(r"\s*=\s*", "=", line)
    tokens, depth, cur = [], 0, ""
    for ch in line:
        if ch in "({":
            depth += 1
        elif ch in ")}":
            depth -= 1
        if ch.isspace() and depth == 0:
            if cur:
                tokens.append(cur)
                cur = ""
        else:
            cur += ch
    if cur:
        tokens.append(cur)
    return tokens


def split_params(tokens: list[str]) -> tuple[list[str], dict[str, str]]:
    pos, params = [], {}
    for t in tokens:
        if "=" in t and not t.startswith(("V(", "v(")):
            k, v = t.split("=", 1)
            params[k] = v
        else:
            pos.append(t)
    return pos, params


def instance_subckt(el: list[str]) -> str:
    pos, _ = split_params(el)
    return pos[-1]


def element_nodes(el: list[str]) -> list[str]:
    kind = el[0][0].upper()
    pos, _ = split_params(el)
    if kind == "M":
        return pos[1:5]
    if kind in "RCVIL":
        return pos[1:3]
    if kind == "X":
        return pos[1:-1]
    return []


def parse_netlist(text: str) -> ParsedNetlist:
    subckts: dict[str, Subckt] = {}
    top: list[list[str]] = []
    params: dict[str, str] = {}
    directives: list[list[str]] = []
    current: Subckt | None = None
    for line in logical_lines(text):
        tokens = tokenize(line)
        head = tokens[0].upper()
        if head == ".SUBCKT":
            pos, p = split_params(tokens[1:])
            current = Subckt(pos[0], pos[1:], p)
            if current.name in subckts:
                raise ValueError(f"duplicate subcircuit {current.name}")
            continue
        if head == ".ENDS":
            if current is None:
                raise ValueError(".ENDS without .SUBCKT")
            subckts[current.name] = current
            current = None
            continue
        if head.startswith("."):
            if head == ".PARAM" and current is None:
                params.update(split_params(tokens[1:])[1])
            directives.append(tokens)
            continue
        (current.elements if current is not None else top).append(tokens)
    if current is not None:
        raise ValueError(f"unterminated subcircuit {current.name}")
    for el in top + [e for s in subckts.values() for e in s.elements]:
        if el[0][0].upper() == "X" and instance_subckt(el) not in subckts:
            raise ValueError(f"instance {el[0]} references unknown subcircuit {instance_subckt(el)}")
    return ParsedNetlist(subckts, top, params, directives)
