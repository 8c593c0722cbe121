#!/usr/bin/env python3
"""Stand-in simulator for adapter tests; mimics ngspice batch and Xyce CLIs.

Deck directives understood: ``.MEAS ... <name>`` lines get ``<name> = 1.5e-10``
(or the value from a ``* fake-meas <name> <value>`` comment), ``.DC`` decks
get a table of two complementary inverter curves.  ``* fake: sleep <s>``
sleeps, ``* fake: drop <name>`` omits a measurement and a line starting with
``BADCARD`` produces a syntax error with exit status 1.
"""

import math
import re
import sys
import time


def main(argv):
    xyce = "xyce" in argv[0].lower()
    if len(argv) > 1 and argv[1] in ("--version", "-v"):
        print("Xyce Release 7.8.0-fake" if xyce else "******\n** ngspice-42 : fake circuit simulator\n******")
        return 0
    if xyce:
        deck, log = argv[1], None
    else:
        log = argv[argv.index("-o") + 1]
        deck = argv[-1]
    text = open(deck).read()
    out = []
    m = re.search(r"^\* fake: sleep (\S+)", text, re.M)
    if m:
        time.sleep(float(m.group(1)))
    if re.search(r"^BADCARD", text, re.M):
        print("Error on line 3: unknown card BADCARD")
        return 1
    drop = set(re.findall(r"^\* fake: drop (\w+)", text, re.M))
    given = dict(re.findall(r"^\* fake-meas (\w+) (\S+)", text, re.M))
    for name in re.findall(r"^\.MEAS\w*\s+\w+\s+(\w+)", text, re.M | re.I):
        if name in drop:
            out.append(f"Error: measure  {name}  (TRIG) : out of interval")
            continue
        val = given.get(name, "1.5e-10")
        out.append(f"{name.upper() if xyce else name:<20}=  {float(val):e}" + ("" if xyce else " targ=  2e-10 trig=  5e-11"))
    table = []
    dc = re.search(r"^\.DC\s+\w+\s+(\S+)\s+(\S+)\s+(\S+)", text, re.M)
    if dc:
        lo, hi, st = (float(x) for x in dc.groups())
        n = int(round((hi - lo) / st)) + 1
        table.append("Index   v-sweep         v(qb_out)       v(q_out)")
        for i in range(n):
            v = lo + i * st
            y = hi / (1 + math.exp((v - 0.5 * hi) / 0.04))
            table.append(f"{i}\t{v:e}\t{y:e}\t{y:e}")
    if xyce:
        with open(deck + ".mt0", "w") as f:
            f.write("\n".join(l for l in out if not l.startswith("Error")) + "\n")
        if table:
            with open(deck + ".prn", "w") as f:
                f.write("\n".join(table) + "\nEnd of Xyce(TM) Simulation\n")
        print("\n".join(l for l in out if l.startswith("Error")))
    else:
        with open(log, "w") as f:
            f.write("\n".join(table + out) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
