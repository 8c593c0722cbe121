"""SPICE emission for 6T arrays, peripheral blocks and analysis decks.

Dialect: plain ``.SUBCKT/.ENDS``, ``.PARAM``, ``.MODEL``, ``.IC``, ``.TRAN``,
``.DC`` and ``.MEAS`` with curly-brace expressions, which both mainstream
open-source simulators accept.  Device models are generic LEVEL=54 cards
whose ``VTH0/U0/VOFF`` are written as the nominal value times
``(1 + relative deviation)``; users replace the nominal ``.PARAM`` block (or
``.INCLUDE`` their own library) for a real process.

Node naming in the top level::

    BL_<c>_<k>, BLB_<c>_<k>   bitline chain nodes, k = 0 (sense end) .. rows
    WL_<r>_<k>                wordline chain nodes, k = 0 (driver end) .. cols
    Q_<r>_<c>, QB_<r>_<c>     cell storage nodes

With parasitics disabled each line collapses to a single node ``BL_<c>``,
``BLB_<c>`` or ``WL_<r>``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .. import __version__
from ..circuit_model import (
    DEVICE_PARAMS,
    DEVICES,
    NOMINAL_VOFF,
    PARAMS_PER_CELL,
    PERIPHERAL_PARAMS,
    CellGeometry,
    ConfigError,
    SramArrayConfig,
    VariationSample,
    device_vth0,
    physical_deviations,
)

CELL_SUBCKT = "SRAM_6T_CELL"
CELL_PORTS = ("BL", "BLB", "WL", "VDD", "VSS", "Q", "QB")
HALF_SUBCKT = "SRAM_HALF_CELL"

# (drain, gate, source, bulk, polarity) for M0..M5
_TOPOLOGY = (
    ("Q", "QB", "VSS", "VSS", "n"),
    ("QB", "Q", "VSS", "VSS", "n"),
    ("BL", "WL", "Q", "VSS", "n"),
    ("BLB", "WL", "QB", "VSS", "n"),
    ("Q", "QB", "VDD", "VDD", "p"),
    ("QB", "Q", "VDD", "VDD", "p"),
)


class DeckKind(str, Enum):
    DC_HOLD_SNM = "dc_hold_snm"
    DC_READ_SNM = "dc_read_snm"
    DC_WRITE_SNM = "dc_write_snm"
    TRAN_READ = "tran_read"
    TRAN_WRITE = "tran_write"


@dataclass(frozen=True)
class DeckOptions:
    sweep_step: float = 1e-3
    t_stop: float = 5e-9
    t_step: float = 1e-12
    t_wl: float = 0.1e-9  # wordline assertion time
    t_edge: float = 10e-12


@dataclass
class NetlistDocument:
    text: str
    manifest: dict = field(default_factory=dict)


def fmt(x: float) -> str:
    """Shortest round-tripping decimal form."""
    return repr(float(x))


def fmt17(x: float) -> str:
    """17 significant digits, used for variation values."""
    return format(float(x), ".17g")


def header(title: str, config: SramArrayConfig | None) -> list[str]:
    lines = [f"* {title}", f"* generator: sramyield {__version__}"]
    if config is not None:
        lines.append(f"* config_hash: {config.hash()}")
        lines.append(f"* array: {config.rows}x{config.cols} vdd={fmt(config.vdd)}")
    return lines


def _check_geometry(cell: CellGeometry) -> None:
    for name in ("w_pd", "w_pu", "w_pg", "l"):
        if not getattr(cell, name) > 0:
            raise ConfigError(name, "must be > 0")


def _model_params(cell: CellGeometry) -> list[str]:
    vn = device_vth0(cell, 0)
    vp = device_vth0(cell, 4)
    return [
        f".PARAM vth0n={fmt(vn)} vth0p={fmt(-vp)} u0n=0.04 u0p=0.01",
        f".PARAM voffn={fmt(NOMINAL_VOFF['n'])} voffp={fmt(NOMINAL_VOFF['p'])}",
    ]


def _subckt_param_list() -> str:
    return " ".join(f"{p}_{d}=0" for d in DEVICES for p in DEVICE_PARAMS)


def cell_subckt_lines(cell: CellGeometry) -> list[str]:
    _check_geometry(cell)
    widths = [cell.width(d) for d in range(6)]
    lines = [f".SUBCKT {CELL_SUBCKT} {' '.join(CELL_PORTS)} {_subckt_param_list()}"]
    for d, name in enumerate(DEVICES):
        pol = _TOPOLOGY[d][4]
        lines.append(
            f".MODEL {'N' if pol == 'n' else 'P'}_{name} {'NMOS' if pol == 'n' else 'PMOS'} LEVEL=54 "
            f"VTH0={{vth0{pol}*(1+vth0_{name})}} U0={{u0{pol}*(1+u0_{name})}} "
            f"VOFF={{voff{pol}*(1+voff_{name})}}"
        )
    for d, name in enumerate(DEVICES):
        drain, gate, src, bulk, pol = _TOPOLOGY[d]
        lines.append(f"{name} {drain} {gate} {src} {bulk} {'N' if pol == 'n' else 'P'}_{name} "
                     f"W={fmt(widths[d])} L={fmt(cell.l)}")
    lines.append(f".ENDS {CELL_SUBCKT}")
    return lines


def emit_cell_subckt(cell: CellGeometry) -> NetlistDocument:
    """The 6T bitcell as a standalone subcircuit with per-device variation parameters."""
    from .parse import parse_netlist

    lines = header("6T SRAM bitcell", None) + _model_params(cell) + cell_subckt_lines(cell)
    text = "\n".join(lines) + "\n"
    parsed = parse_netlist(text)
    man = parsed.manifest()
    # nothing is instantiated at top level, so count the definition itself
    man["n_transistors"] = sum(1 for el in parsed.subckts[CELL_SUBCKT].elements if el[0][0].upper() == "M")
    return NetlistDocument(text, man)


# ---------------------------------------------------------------------------
# peripherals (fixed textbook topologies)

PERIPHERAL_SUBCKTS = {
    "PRECHARGE": [
        ".SUBCKT PRECHARGE BL BLB PCB VPRE",
        "MP0 BL PCB VPRE VPRE PCH W=0.27e-6 L=50e-9",
        "MP1 BLB PCB VPRE VPRE PCH W=0.27e-6 L=50e-9",
        "MP2 BL PCB BLB VPRE PCH W=0.135e-6 L=50e-9",
        ".ENDS PRECHARGE",
    ],
    "WRITE_DRIVER": [
        ".SUBCKT WRITE_DRIVER BL BLB DIN WE VDD VSS",
        "MI0P DINB DIN VDD VDD PCH W=0.18e-6 L=50e-9",
        "MI0N DINB DIN VSS VSS NCH W=0.09e-6 L=50e-9",
        "MN0 BL WE X0 VSS NCH W=0.36e-6 L=50e-9",
        "MN1 X0 DINB VSS VSS NCH W=0.36e-6 L=50e-9",
        "MN2 BLB WE X1 VSS NCH W=0.36e-6 L=50e-9",
        "MN3 X1 DIN VSS VSS NCH W=0.36e-6 L=50e-9",
        ".ENDS WRITE_DRIVER",
    ],
    "COLMUX": [
        ".SUBCKT COLMUX BL BLB SBL SBLB SEL VSS",
        "MN0 BL SEL SBL VSS NCH W=0.27e-6 L=50e-9",
        "MN1 BLB SEL SBLB VSS NCH W=0.27e-6 L=50e-9",
        ".ENDS COLMUX",
    ],
    "SENSE_AMP": [
        ".SUBCKT SENSE_AMP SBL SBLB SAE OUT OUTB VDD VSS",
        "VOS SBL SBLI DC {sa_offset}",
        "MP0 OUT OUTB VDD VDD PCH W=0.18e-6 L=50e-9",
        "MP1 OUTB OUT VDD VDD PCH W=0.18e-6 L=50e-9",
        "MN0 OUT OUTB TAIL VSS NCH W=0.27e-6 L=50e-9",
        "MN1 OUTB OUT TAIL VSS NCH W=0.27e-6 L=50e-9",
        "MN2 TAIL SAE VSS VSS NCH W=0.36e-6 L=50e-9",
        "MP2 OUT SAE SBLI VDD PCH W=0.18e-6 L=50e-9",
        "MP3 OUTB SAE SBLB VDD PCH W=0.18e-6 L=50e-9",
        ".ENDS SENSE_AMP",
    ],
    "WL_DRIVER": [
        ".SUBCKT WL_DRIVER IN WL VDD VSS",
        "MP0 X IN VDD VDD PCH W=0.18e-6 L=50e-9",
        "MN0 X IN VSS VSS NCH W=0.09e-6 L=50e-9",
        "MP1 WL X VDD VDD PCH W=0.72e-6 L=50e-9",
        "MN1 WL X VSS VSS NCH W=0.36e-6 L=50e-9",
        ".ENDS WL_DRIVER",
    ],
}
PERIPHERAL_MODELS = [
    ".MODEL NCH NMOS LEVEL=54 VTH0={vth0n} U0={u0n} VOFF={voffn}",
    ".MODEL PCH PMOS LEVEL=54 VTH0={vth0p} U0={u0p} VOFF={voffp}",
]


# ---------------------------------------------------------------------------
# array

def _resolve_sample(config: SramArrayConfig, sample) -> np.ndarray:
    dim = config.variation_dim
    if sample is None or (isinstance(sample, str) and sample == "nominal"):
        return np.zeros(dim)
    z = sample.values if isinstance(sample, VariationSample) else np.asarray(sample, dtype=np.float64)
    if z.ndim != 1 or z.shape[0] != dim:
        raise ValueError(f"sample dimension {z.shape[-1] if z.ndim else 0} does not match "
                         f"config dimension {dim}")
    return z


def relative_deviations(config: SramArrayConfig, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-device relative deviations ``(n_cells, 6, 3)`` and peripheral SI offsets ``(4,)``."""
    dev = physical_deviations(config, z[None, :])
    vt0 = np.array([device_vth0(config.cell, d) for d in range(6)])
    voff = np.array([abs(NOMINAL_VOFF["n" if d < 4 else "p"]) for d in range(6)])
    rel = np.stack([dev.dvth[0] / vt0, dev.u0_factor[0] - 1.0, dev.dvoff[0] / voff], axis=-1)
    return rel, dev.periph[0]


def _bl_node(config, name, c, r):
    return f"{name}_{c}_{r + 1}" if config.parasitics.enabled else f"{name}_{c}"


def _wl_node(config, r, c):
    return f"WL_{r}_{c + 1}" if config.parasitics.enabled else f"WL_{r}"


def bl_sense_node(config, name, c):
    return f"{name}_{c}_0" if config.parasitics.enabled else f"{name}_{c}"


def wl_drive_node(config, r):
    return f"WL_{r}_0" if config.parasitics.enabled else f"WL_{r}"


def accessed_cell(config: SramArrayConfig) -> tuple[int, int]:
    """The far cell (last row, last column) is the one read and written in decks."""
    return config.rows - 1, config.cols - 1


def _rc_lines(config: SramArrayConfig) -> list[str]:
    par = config.parasitics
    if not par.enabled:
        return []
    out = ["* distributed pi-segment interconnect"]
    r_bl, c_bl2 = fmt(par.r_bl_seg), fmt(par.c_bl_seg / 2.0)
    r_wl, c_wl2 = fmt(par.r_wl_seg), fmt(par.c_wl_seg / 2.0)
    for c in range(config.cols):
        for name in ("BL", "BLB"):
            for j in range(1, config.rows + 1):
                a, b = f"{name}_{c}_{j - 1}", f"{name}_{c}_{j}"
                out.append(f"C{name}_{c}_{j}A {a} 0 {c_bl2}")
                out.append(f"R{name}_{c}_{j} {a} {b} {r_bl}")
                out.append(f"C{name}_{c}_{j}B {b} 0 {c_bl2}")
    for r in range(config.rows):
        for j in range(1, config.cols + 1):
            a, b = f"WL_{r}_{j - 1}", f"WL_{r}_{j}"
            out.append(f"CWL_{r}_{j}A {a} 0 {c_wl2}")
            out.append(f"RWL_{r}_{j} {a} {b} {r_wl}")
            out.append(f"CWL_{r}_{j}B {b} 0 {c_wl2}")
    return out


def _cell_instances(config: SramArrayConfig, rel: np.ndarray) -> list[str]:
    out = ["* core cells (row-major)"]
    for r in range(config.rows):
        for c in range(config.cols):
            k = r * config.cols + c
            params = " ".join(
                f"{p}_{d}={fmt17(rel[k, di, pi])}"
                for di, d in enumerate(DEVICES)
                for pi, p in enumerate(DEVICE_PARAMS)
            )
            nodes = (_bl_node(config, "BL", c, r), _bl_node(config, "BLB", c, r),
                     _wl_node(config, r, c), "VDD", "VSS", f"Q_{r}_{c}", f"QB_{r}_{c}")
            out.append(f"XR{r}C{c} {' '.join(nodes)} {CELL_SUBCKT} {params}")
    return out


def _peripheral_instances(config: SramArrayConfig) -> list[str]:
    out = ["* peripherals"]
    m = config.mux_ratio
    for c in range(config.cols):
        bl, blb = bl_sense_node(config, "BL", c), bl_sense_node(config, "BLB", c)
        g = c // m
        out.append(f"XPRE{c} {bl} {blb} PCB VPRE PRECHARGE")
        out.append(f"XWD{c} {bl} {blb} DIN WE VDD VSS WRITE_DRIVER")
        out.append(f"XMUX{c} {bl} {blb} SBL_{g} SBLB_{g} SEL_{c % m} VSS COLMUX")
    for g in range(config.cols // m):
        out.append(f"XSA{g} SBL_{g} SBLB_{g} SAE OUT_{g} OUTB_{g} VDD VSS SENSE_AMP")
    for r in range(config.rows):
        out.append(f"XWLD{r} WLIN_{r} {wl_drive_node(config, r)} VDD VSS WL_DRIVER")
    return out


def _ic_lines(config: SramArrayConfig, accessed_q: int) -> list[str]:
    """Initial conditions: idle rows follow the leakage pattern, the accessed cell holds ``accessed_q``."""
    vdd = fmt(config.vdd)
    ra, _ = accessed_cell(config)
    bits = config.leakage.idle_bits(config.rows - 1)
    out = []
    for r in range(config.rows):
        q = accessed_q if r == ra else bits[r if r < ra else r - 1]
        for c in range(config.cols):
            vq, vqb = (vdd, "0") if q else ("0", vdd)
            out.append(f".IC V(Q_{r}_{c})={vq} V(QB_{r}_{c})={vqb}")
    return out


def _array_body(config: SramArrayConfig, z: np.ndarray) -> list[str]:
    rel, periph = relative_deviations(config, z)
    lines = _model_params(config.cell)
    if config.peripherals is not None:
        lines.append(".PARAM " + " ".join(f"{p}={fmt17(periph[i])}"
                                          for i, p in enumerate(PERIPHERAL_PARAMS)))
        lines += PERIPHERAL_MODELS
        for block in PERIPHERAL_SUBCKTS.values():
            lines += block
    lines += cell_subckt_lines(config.cell)
    lines += _cell_instances(config, rel)
    lines += _rc_lines(config)
    if config.peripherals is not None:
        lines += _peripheral_instances(config)
    return lines


def emit_array(config: SramArrayConfig, sample=None) -> NetlistDocument:
    """Array netlist (no sources or analyses) with the sample's deviations substituted.

    ``sample`` is a :class:`VariationSample`, a standardized vector, or ``None``
    / ``"nominal"``.  Idle-cell initial conditions follow the leakage policy.
    """
    from .parse import parse_netlist

    z = _resolve_sample(config, sample)
    lines = header(f"SRAM array {config.rows}x{config.cols}", config)
    lines += _array_body(config, z)
    lines += _ic_lines(config, 0)
    text = "\n".join(lines) + "\n"
    return NetlistDocument(text, parse_netlist(text).manifest())


# ---------------------------------------------------------------------------
# decks

def _pulse(v1: str, v2: str, td: str, edge: float, width: float, period: float) -> str:
    return f"PULSE({v1} {v2} {td} {fmt(edge)} {fmt(edge)} {fmt(width)} {fmt(period)})"


def _tran_sources(config: SramArrayConfig, opts: DeckOptions, write: bool) -> list[str]:
    vdd = fmt(config.vdd)
    ra, ca = accessed_cell(config)
    width = opts.t_stop
    period = 2 * opts.t_stop
    out = [f"VDD VDD 0 DC {vdd}", "VSS VSS 0 DC 0"]
    periph = config.peripherals is not None
    td = fmt(opts.t_wl) if not periph else f"{{{fmt(opts.t_wl)}+wl_skew}}"
    for r in range(config.rows):
        target = f"WLIN_{r}" if periph else wl_drive_node(config, r)
        if r == ra:
            if periph:
                # the WL driver inverts: input falls to assert
                out.append(f"VWL{r} {target} 0 {_pulse(vdd, '0', td, opts.t_edge, width, period)}")
            else:
                out.append(f"VWL{r} {target} 0 {_pulse('0', vdd, td, opts.t_edge, width, period)}")
        else:
            out.append(f"VWL{r} {target} 0 DC {vdd if periph else '0'}")
    if periph:
        out.append(f"VPRE VPRE 0 DC {{{vdd}+precharge_level}}")
        out.append(f"VPCB PCB 0 {_pulse('0', vdd, fmt(opts.t_wl / 2), opts.t_edge, width, period)}")
        for s in range(config.mux_ratio):
            out.append(f"VSEL{s} SEL_{s} 0 DC {vdd if s == ca % config.mux_ratio else '0'}")
        out.append("VSAE SAE 0 DC 0")
        if write:
            out.append(f"VDIN DIN 0 DC {vdd}")
            wtd = f"{{{fmt(opts.t_wl)}+write_driver_delay}}"
            out.append(f"VWE WE 0 {_pulse('0', vdd, wtd, opts.t_edge, width, period)}")
        else:
            out.append("VDIN DIN 0 DC 0")
            out.append("VWE WE 0 DC 0")
    elif write:
        out.append(f"VBLW {bl_sense_node(config, 'BL', ca)} 0 DC {vdd}")
        out.append(f"VBLBW {bl_sense_node(config, 'BLB', ca)} 0 DC 0")
    return out


def _bitline_ic(config: SramArrayConfig) -> list[str]:
    vdd = fmt(config.vdd)
    out = []
    for c in range(config.cols):
        nodes = ([f"{n}_{c}_{k}" for n in ("BL", "BLB") for k in range(config.rows + 1)]
                 if config.parasitics.enabled else [f"BL_{c}", f"BLB_{c}"])
        out.append(".IC " + " ".join(f"V({n})={vdd}" for n in nodes))
    return out


def _tran_deck(config: SramArrayConfig, z: np.ndarray, kind: DeckKind, opts: DeckOptions) -> list[str]:
    if not opts.t_stop > 0:
        raise ValueError("transient decks require t_stop > 0")
    write = kind is DeckKind.TRAN_WRITE
    ra, ca = accessed_cell(config)
    lines = header(f"{kind.value} deck, {config.rows}x{config.cols}", config)
    lines += _array_body(config, z)
    lines += _tran_sources(config, opts, write)
    lines += _ic_lines(config, 0)
    if not write or config.peripherals is not None:
        lines += _bitline_ic(config)
    half = fmt(config.vdd / 2)
    trig = f"V({wl_drive_node(config, ra)})"
    lines.append(f".TRAN {fmt(opts.t_step)} {fmt(opts.t_stop)} UIC")
    if write:
        target = fmt(config.write_flip_fraction * config.vdd)
        lines.append(f".MEAS TRAN t_write TRIG {trig} VAL={half} RISE=1 "
                     f"TARG V(Q_{ra}_{ca}) VAL={target} RISE=1")
    else:
        bl, blb = bl_sense_node(config, "BL", ca), bl_sense_node(config, "BLB", ca)
        lines.append(f".MEAS TRAN t_read TRIG {trig} VAL={half} RISE=1 "
                     f"TARG V({blb},{bl}) VAL={fmt(config.sense_differential)} RISE=1")
    lines.append(".END")
    return lines


def _half_cell_lines(cell: CellGeometry) -> list[str]:
    # One inverter plus its pass gate; PD/PU/PG device names follow the cell.
    w = (cell.w_pd, cell.w_pu, cell.w_pg)
    return [
        f".SUBCKT {HALF_SUBCKT} IN OUT BL WL VDD VSS dpd=0 dpu=0 dpg=0 upd=0 upu=0 upg=0 "
        "opd=0 opu=0 opg=0",
        ".MODEL N_PD NMOS LEVEL=54 VTH0={vth0n*(1+dpd)} U0={u0n*(1+upd)} VOFF={voffn*(1+opd)}",
        ".MODEL N_PG NMOS LEVEL=54 VTH0={vth0n*(1+dpg)} U0={u0n*(1+upg)} VOFF={voffn*(1+opg)}",
        ".MODEL P_PU PMOS LEVEL=54 VTH0={vth0p*(1+dpu)} U0={u0p*(1+upu)} VOFF={voffp*(1+opu)}",
        f"MPD OUT IN VSS VSS N_PD W={fmt(w[0])} L={fmt(cell.l)}",
        f"MPU OUT IN VDD VDD P_PU W={fmt(w[1])} L={fmt(cell.l)}",
        f"MPG BL WL OUT VSS N_PG W={fmt(w[2])} L={fmt(cell.l)}",
        f".ENDS {HALF_SUBCKT}",
    ]


def _half_params(rel: np.ndarray, pd: int, pu: int, pg: int) -> str:
    out = []
    for prefix, k in (("d", 0), ("u", 1), ("o", 2)):
        for tag, dev in (("pd", pd), ("pu", pu), ("pg", pg)):
            out.append(f"{prefix}{tag}={fmt17(rel[dev, k])}")
    return " ".join(out)


def _dc_deck(config: SramArrayConfig, z: np.ndarray, kind: DeckKind, opts: DeckOptions,
             cell_index: int) -> list[str]:
    step = opts.sweep_step
    if not (0 < step <= config.vdd):
        raise ValueError("sweep step must lie in (0, vdd]")
    rel, _ = relative_deviations(config, z)
    rel = rel[cell_index]
    vdd = fmt(config.vdd)
    mode = {DeckKind.DC_HOLD_SNM: "hold", DeckKind.DC_READ_SNM: "read",
            DeckKind.DC_WRITE_SNM: "write"}[kind]
    lines = header(f"{kind.value} butterfly deck, cell {cell_index}", config)
    lines += _model_params(config.cell)
    lines += _half_cell_lines(config.cell)
    lines.append(f"VDD VDD 0 DC {vdd}")
    lines.append("VSS VSS 0 DC 0")
    lines.append("VSWEEP VIN 0 DC 0")
    if mode == "hold":
        lines.append("VWL WL 0 DC 0")
        # bitlines float: only a negligible path to the precharge level
        lines.append("RFLOATBL BL VDD 1e12")
        lines.append("RFLOATBLB BLB VDD 1e12")
    else:
        lines.append(f"VWL WL 0 DC {vdd}")
        lines.append(f"VBL BL 0 DC {vdd}")
        lines.append(f"VBLB BLB 0 DC {vdd if mode == 'read' else '0'}")
    lines.append("* sweep block 1: QB = f(Q) through M1/M5/M3")
    lines.append(f"XLOBE1 VIN QB_OUT BLB WL VDD VSS {HALF_SUBCKT} {_half_params(rel, 1, 5, 3)}")
    lines.append("* sweep block 2: Q = f(QB) through M0/M4/M2")
    lines.append(f"XLOBE2 VIN Q_OUT BL WL VDD VSS {HALF_SUBCKT} {_half_params(rel, 0, 4, 2)}")
    lines.append(f".DC VSWEEP 0 {vdd} {fmt(step)}")
    lines.append(".PRINT DC V(QB_OUT) V(Q_OUT)")
    lines.append(".END")
    return lines


def emit_deck(config: SramArrayConfig, kind: DeckKind | str, sample=None,
              options: DeckOptions = DeckOptions(), cell_index: int | None = None) -> NetlistDocument:
    """A runnable deck: circuit, sources, one analysis and its measurements.

    DC kinds build the open-loop butterfly for one cell (default: the far
    cell); transient kinds instantiate the whole array and measure from the
    wordline 50% point to the sense differential (read) or to
    ``write_flip_fraction * vdd`` on Q (write).
    """
    from .parse import parse_netlist

    kind = DeckKind(kind)
    z = _resolve_sample(config, sample)
    if kind in (DeckKind.TRAN_READ, DeckKind.TRAN_WRITE):
        lines = _tran_deck(config, z, kind, options)
    else:
        if cell_index is None:
            ra, ca = accessed_cell(config)
            cell_index = ra * config.cols + ca
        lines = _dc_deck(config, z, kind, options, cell_index)
    text = "\n".join(lines) + "\n"
    doc = NetlistDocument(text, parse_netlist(text).manifest())
    doc.manifest["kind"] = kind.value
    return doc


def variation_parameter_count(config: SramArrayConfig) -> int:
    """Number of variation substitutions an array netlist carries (core + peripheral)."""
    return PARAMS_PER_CELL * config.n_cells + (len(PERIPHERAL_PARAMS) if config.peripherals else 0)
