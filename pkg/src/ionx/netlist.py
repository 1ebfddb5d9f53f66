"""Export of the compartment network as a text netlist, and a parser for it.

Dialect (one element per line, ``*`` starts a comment)::

    R name n+ n- value                 resistor
    C name n+ n- value                 capacitor
    V name n+ n- value                 independent voltage source
    I name n+ n- value                 independent current source
    G name n+ n- ctrl+ ctrl- gain      voltage-controlled current source
    F name n+ n- vsource gain          current-controlled current source
    H name n+ n- vsource gain          current-controlled voltage source
    .title text | .mode text | .drive text | .end

Current sources drive ``value`` from ``n+`` to ``n-`` through the external
circuit.  Node ``0`` is ground.  Compartment ``k`` (1-based) has centre nodes
``c{i}_{k}`` and ``phi_{k}``; face ``f`` (0..N) has ``c{i}f_{f}`` and
``phif_{f}``.  The right outer potential face is grounded.

Voltage-controlled migration sources are state dependent; their gains are
evaluated at the exported state.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .grid import CompartmentGrid, diffusion_profile, theta_profile
from .solver import Galvanostatic, Potentiostatic, link_fluxes

_NODE_COUNT = {"R": 2, "C": 2, "V": 2, "I": 2, "G": 4, "F": 2, "H": 2}


class NetlistSyntaxError(ValueError):
    pass


@dataclass(frozen=True)
class Element:
    kind: str
    name: str
    nodes: tuple
    value: float
    control: str | None = None

    def to_line(self) -> str:
        parts = [self.kind, self.name, *self.nodes]
        if self.control is not None:
            parts.append(self.control)
        parts.append(repr(float(self.value)))
        return " ".join(parts)


@dataclass
class Netlist:
    title: str = ""
    directives: dict = field(default_factory=dict)
    elements: list = field(default_factory=list)
    comments: list = field(default_factory=list)

    def counts(self) -> Counter:
        """Element count per kind letter."""
        return Counter(e.kind for e in self.elements)

    def count_prefix(self, prefix: str) -> int:
        return sum(1 for e in self.elements if e.name.startswith(prefix))

    def to_text(self) -> str:
        lines = [f".title {self.title}"]
        for key in ("mode", "drive"):
            if key in self.directives:
                lines.append(f".{key} {self.directives[key]}")
        lines += [f"* {c}" for c in self.comments]
        lines += [e.to_line() for e in self.elements]
        lines.append(".end")
        return "\n".join(lines) + "\n"


def parse_netlist(text: str) -> Netlist:
    nl = Netlist()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("*"):
            nl.comments.append(line[1:].strip())
            continue
        if line.startswith("."):
            key, _, rest = line[1:].partition(" ")
            if key == "end":
                break
            if key == "title":
                nl.title = rest
            else:
                nl.directives[key] = rest
            continue
        tok = line.split()
        kind = tok[0].upper()
        if kind not in _NODE_COUNT:
            raise NetlistSyntaxError(f"line {lineno}: unknown element type {tok[0]!r}")
        n = _NODE_COUNT[kind]
        want = 2 + n + (1 if kind in "FH" else 0) + 1
        if len(tok) != want:
            raise NetlistSyntaxError(f"line {lineno}: expected {want} fields for {kind}, got {len(tok)}")
        try:
            value = float(tok[-1])
        except ValueError:
            raise NetlistSyntaxError(f"line {lineno}: bad value {tok[-1]!r}") from None
        control = tok[2 + n] if kind in "FH" else None
        nl.elements.append(Element(kind, tok[1], tuple(tok[2:2 + n]), value, control))
    return nl


def build_netlist(s, g: CompartmentGrid, eq, mode) -> Netlist:
    """Netlist object for ``(s, g)`` with state-dependent gains taken from ``eq``."""
    if eq.nodes.shape != (2 * g.N + 1, s.n_species + 1):
        raise ValueError("state does not match grid")
    N, m = g.N, s.n_species
    D = diffusion_profile(g, s)
    theta = theta_profile(g, s)
    z = s.z
    half = 0.5 * g.widths
    cf = eq.c_face
    pair = m == 2 and z[0] == -z[1]

    def face_phi(f):
        return "0" if f == N else f"phif_{f}"

    els = []
    for k in range(1, N + 1):
        j = k - 1
        for i in range(1, m + 1):
            Rd = half[j] / D[i - 1, j]
            els.append(Element("R", f"Rd{i}_{k}a", (f"c{i}f_{k - 1}", f"c{i}_{k}"), Rd))
            els.append(Element("R", f"Rd{i}_{k}b", (f"c{i}_{k}", f"c{i}f_{k}"), Rd))
            gm = -D[i - 1, j] * z[i - 1] * cf[i - 1, j] / half[j]
            gp = D[i - 1, j] * z[i - 1] * cf[i - 1, j + 1] / half[j]
            els.append(Element("G", f"GJe{i}_{k}m", (f"c{i}f_{k - 1}", f"c{i}_{k}", f"phi_{k}", face_phi(k - 1)), gm))
            els.append(Element("G", f"GJe{i}_{k}p", (f"c{i}_{k}", f"c{i}f_{k}", f"phi_{k}", face_phi(k)), gp))
            els.append(Element("C", f"Cd{i}_{k}", (f"c{i}_{k}", "0"), g.widths[j]))
        Rp = half[j] / s.epsilon
        els.append(Element("R", f"Rp_{k}a", (face_phi(k - 1), f"phi_{k}"), Rp))
        els.append(Element("R", f"Rp_{k}b", (f"phi_{k}", face_phi(k)), Rp))
        # stored charge -delta_k (sum z_i c_i - theta); a symmetric pair of
        # counter-ions needs a single source controlled by c1 - c2
        if pair:
            els.append(Element("G", f"GJp_{k}", ("0", f"phi_{k}", f"c1_{k}", f"c2_{k}"), -g.widths[j] * z[0]))
        else:
            for i in range(1, m + 1):
                els.append(Element("G", f"GJp{i}_{k}", ("0", f"phi_{k}", f"c{i}_{k}", "0"), -g.widths[j] * z[i - 1]))
        if theta[j] != 0:
            els.append(Element("I", f"Ith_{k}", ("0", f"phi_{k}"), g.widths[j] * theta[j]))
    for i in range(1, m + 1):
        els.append(Element("V", f"Vc{i}L", (f"c{i}f_0", "0"), s.c0))
        els.append(Element("V", f"Vc{i}R", (f"c{i}f_{N}", "0"), s.c0))

    J0 = link_fluxes(s, g, eq)[:, 0]
    faradaic = float(np.dot(z, J0))
    comments = [f"N={N} species={m} epsilon={s.epsilon!r}",
                f"faradaic current at export state: {faradaic!r}",
                f"left displacement at export state: {eq.displacement_left!r}"]
    if isinstance(mode, Potentiostatic):
        sig = mode.signal
        els += [
            Element("V", "VA", ("nA", "0"), sig.eval(eq.tau) if np.isfinite(eq.tau) else 0.0),
            Element("V", "VIf", ("nA", "phif_0"), 0.0),
            Element("F", "FIf", ("nI", "0"), 1.0, "VIf"),
            Element("C", "C1", ("nD", "0"), 1.0),
            Element("H", "HD", ("nD", "nI"), 1.0, "VA"),
        ]
        mode_name = "potentiostatic"
    elif isinstance(mode, Galvanostatic):
        sig = mode.current
        els += [
            Element("I", "IA", ("0", "nD"), sig.eval(eq.tau) if np.isfinite(eq.tau) else 0.0),
            Element("V", "VIf", ("nF", "0"), 0.0),
            Element("F", "FIf", ("nD", "0"), 1.0, "VIf"),
            Element("C", "C1", ("nD", "0"), 1.0),
            Element("G", "GD", ("0", "phif_0", "nD", "0"), 1.0),
        ]
        mode_name = "galvanostatic"
    else:
        raise TypeError("mode must be Potentiostatic or Galvanostatic")
    return Netlist(title=f"ion-exchange membrane network, {N} compartments",
                   directives={"mode": mode_name, "drive": str(sig)},
                   elements=els, comments=comments)


def export_netlist(s, g: CompartmentGrid, eq, mode) -> str:
    """Text netlist of the network; see the module docstring for the dialect."""
    return build_netlist(s, g, eq, mode).to_text()
