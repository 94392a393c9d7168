"""Line-oriented optical bench description language.

One directive per line, ``#`` starts a comment::

    polarizer V
    bs
    phase mode=r value=PHI
    hwp angle=22.5
    sagnac pbs=on dp=+45
    hwp angle=22.5
    measure pol

A bench opens with exactly one ``polarizer`` (the photon enters in the l
mode) and closes with exactly one ``measure pol``. Angles are degrees,
phases radians or a symbol bound at compile time.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .optics import (
    DoveAngle,
    SagnacConfig,
    beam_splitter_unitary,
    hwp_unitary,
    phase_shifter_unitary,
    sagnac_unitary,
)
from .qcore import PolProbs, StateVector, Unitary4, apply_unitary, compose, pol_marginal

NUMBER_RE = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
SYMBOL_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_KEY_VALUE_RE = re.compile(r"([^=\s]*)=(\S*)")


@dataclass(frozen=True)
class Span:
    line: int
    column: int
    end_column: int


@dataclass(frozen=True)
class ParseDiagnostic:
    line: int
    column: int
    message: str
    severity: str = "error"

    def __str__(self):
        return f"{self.line}:{self.column}: {self.severity}: {self.message}"


class BenchParseError(ValueError):
    def __init__(self, diagnostics: list[ParseDiagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


class BenchCompileError(ValueError):
    pass


@dataclass(frozen=True)
class Polarizer:
    pol: str  # "V" or "H"
    span: Span | None = field(default=None, compare=False)

    def format(self):
        return f"polarizer {self.pol}"


@dataclass(frozen=True)
class WavePlate:
    angle: float
    span: Span | None = field(default=None, compare=False)

    def format(self):
        return f"hwp angle={self.angle!r}"


@dataclass(frozen=True)
class BeamSplitter:
    span: Span | None = field(default=None, compare=False)

    def format(self):
        return "bs"


@dataclass(frozen=True)
class PhaseShift:
    value: Union[float, str]  # radians, or a symbol name
    mode: str = "r"
    span: Span | None = field(default=None, compare=False)

    def format(self):
        val = self.value if isinstance(self.value, str) else repr(self.value)
        return f"phase mode={self.mode} value={val}"


@dataclass(frozen=True)
class Sagnac:
    config: SagnacConfig
    span: Span | None = field(default=None, compare=False)

    def format(self):
        return f"sagnac {self.config}"


@dataclass(frozen=True)
class Measure:
    basis: str = "pol"
    span: Span | None = field(default=None, compare=False)

    def format(self):
        return f"measure {self.basis}"


Element = Union[Polarizer, WavePlate, BeamSplitter, PhaseShift, Sagnac, Measure]


@dataclass(frozen=True)
class BenchProgram:
    elements: tuple
    symbols: frozenset = frozenset()

    def format(self) -> str:
        return "".join(e.format() + "\n" for e in self.elements)


@dataclass(frozen=True)
class CompiledBench:
    initial_state: StateVector
    unitaries: tuple
    labels: tuple
    measurement: str = "pol"

    @property
    def matrix(self) -> Unitary4:
        m = Unitary4.identity()
        for u in self.unitaries:
            m = compose(u, m)
        return m

    def final_state(self) -> StateVector:
        s = self.initial_state
        for u in self.unitaries:
            s = apply_unitary(u, s)
        return s

    def run(self) -> PolProbs:
        return pol_marginal(self.final_state())


class _LineParser:
    def __init__(self, lineno: int, tokens: list[tuple[int, str]], diags: list[ParseDiagnostic]):
        self.lineno = lineno
        self.tokens = tokens
        self.diags = diags
        self.ok = True

    def error(self, column: int, message: str):
        self.diags.append(ParseDiagnostic(self.lineno, column, message))
        self.ok = False

    def no_args(self, name):
        for col, tok in self.tokens[1:]:
            self.error(col, f"'{name}' takes no arguments, got '{tok}'")

    def keywords(self, name, allowed) -> dict[str, tuple[int, str]]:
        out = {}
        for col, tok in self.tokens[1:]:
            m = _KEY_VALUE_RE.fullmatch(tok)
            if not m or not m.group(1):
                self.error(col, f"expected key=value argument for '{name}', got '{tok}'")
                continue
            key, value = m.group(1), m.group(2)
            if key not in allowed:
                self.error(col, f"unknown key '{key}' for '{name}' (allowed: {', '.join(allowed)})")
            elif key in out:
                self.error(col, f"duplicate key '{key}'")
            elif not value:
                self.error(col + len(key) + 1, f"missing value for '{key}'")
            else:
                out[key] = (col + len(key) + 1, value)
        return out

    def require(self, name, kw, key):
        if key not in kw:
            self.error(self.tokens[0][0], f"'{name}' requires {key}=...")
            return None
        return kw[key]

    def number(self, col, text, what):
        if not NUMBER_RE.fullmatch(text):
            self.error(col, f"malformed number for {what}: '{text}'")
            return None
        val = float(text)
        if not np.isfinite(val):
            self.error(col, f"{what} out of range: '{text}'")
            return None
        return val


def _tokenize(line: str) -> list[tuple[int, str]]:
    return [(m.start() + 1, m.group()) for m in re.finditer(r"\S+", line)]


def _parse_line(lineno: int, tokens, diags) -> Element | None:
    p = _LineParser(lineno, tokens, diags)
    col0, name = tokens[0]
    span = Span(lineno, col0, tokens[-1][0] + len(tokens[-1][1]))
    elem = None
    if name == "polarizer":
        if len(tokens) != 2 or tokens[1][1] not in ("V", "H"):
            col = tokens[1][0] if len(tokens) > 1 else col0
            p.error(col, "polarizer takes exactly one argument, V or H")
        else:
            elem = Polarizer(tokens[1][1], span)
    elif name == "bs":
        p.no_args(name)
        elem = BeamSplitter(span)
    elif name == "hwp":
        kw = p.keywords(name, ("angle",))
        arg = p.require(name, kw, "angle")
        if arg:
            angle = p.number(*arg, "angle (degrees)")
            if angle is not None:
                elem = WavePlate(angle, span)
    elif name == "phase":
        kw = p.keywords(name, ("mode", "value"))
        mode = p.require(name, kw, "mode")
        if mode and mode[1] != "r":
            p.error(mode[0], f"unsupported phase mode '{mode[1]}' (only 'r')")
        arg = p.require(name, kw, "value")
        if arg:
            col, text = arg
            if SYMBOL_RE.fullmatch(text):
                elem = PhaseShift(text, "r", span)
            else:
                val = p.number(col, text, "phase (radians)")
                if val is not None:
                    elem = PhaseShift(val, "r", span)
    elif name == "sagnac":
        kw = p.keywords(name, ("pbs", "dp"))
        pbs = p.require(name, kw, "pbs")
        dp = p.require(name, kw, "dp")
        pbs_on = dp_angle = None
        if pbs:
            if pbs[1] in ("on", "off"):
                pbs_on = pbs[1] == "on"
            else:
                p.error(pbs[0], f"pbs must be on or off, got '{pbs[1]}'")
        if dp:
            if dp[1] in ("+45", "45"):
                dp_angle = DoveAngle.PLUS_45
            elif dp[1] == "-45":
                dp_angle = DoveAngle.MINUS_45
            else:
                p.error(dp[0], f"dp must be +45 or -45, got '{dp[1]}'")
        if pbs_on is not None and dp_angle is not None:
            elem = Sagnac(SagnacConfig(pbs_on, dp_angle), span)
    elif name == "measure":
        if len(tokens) != 2 or tokens[1][1] != "pol":
            col = tokens[1][0] if len(tokens) > 1 else col0
            p.error(col, "measure takes exactly one argument: pol")
        else:
            elem = Measure("pol", span)
    else:
        p.error(col0, f"unknown directive '{name}'")
    return elem if p.ok else None


def _decode(data: bytes, diags) -> str | None:
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        prefix = data[: exc.start]
        line = prefix.count(b"\n") + 1
        col = exc.start - (prefix.rfind(b"\n") + 1) + 1
        diags.append(ParseDiagnostic(line, col, "invalid UTF-8"))
        return None


def parse(text) -> BenchProgram:
    """Parse bench text (str or bytes).

    Raises ``BenchParseError`` carrying every diagnostic found; no partial
    program is returned.
    """
    diags: list[ParseDiagnostic] = []
    if isinstance(text, (bytes, bytearray)):
        text = _decode(bytes(text), diags)
        if text is None:
            raise BenchParseError(diags)
    lines = text.split("\n")
    elements: list[Element] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0]
        tokens = _tokenize(line)
        if not tokens:
            continue
        elem = _parse_line(lineno, tokens, diags)
        if elem is not None:
            elements.append(elem)

    last_line = max(len(lines), 1)
    measures = [e for e in elements if isinstance(e, Measure)]
    polarizers = [e for e in elements if isinstance(e, Polarizer)]
    if not measures and not any("measure" in d.message for d in diags):
        diags.append(ParseDiagnostic(last_line, 1, "missing measure directive"))
    for extra in measures[1:]:
        diags.append(ParseDiagnostic(extra.span.line, extra.span.column, "duplicate measure directive"))
    if measures and elements[-1] is not measures[0] and len(measures) == 1:
        m = measures[0]
        diags.append(ParseDiagnostic(m.span.line, m.span.column, "measure must be the last directive"))
    if not polarizers and not any("polarizer" in d.message for d in diags):
        diags.append(ParseDiagnostic(1, 1, "missing polarizer prologue"))
    for extra in polarizers[1:]:
        diags.append(ParseDiagnostic(extra.span.line, extra.span.column, "duplicate polarizer directive"))
    if polarizers and elements[0] is not polarizers[0] and len(polarizers) == 1:
        pz = polarizers[0]
        diags.append(ParseDiagnostic(pz.span.line, pz.span.column, "polarizer must be the first directive"))

    if diags:
        raise BenchParseError(sorted(diags, key=lambda d: (d.line, d.column)))
    symbols = frozenset(e.value for e in elements if isinstance(e, PhaseShift) and isinstance(e.value, str))
    return BenchProgram(tuple(elements), symbols)


def _lower(elem: Element, bindings) -> tuple[Unitary4, str]:
    if isinstance(elem, BeamSplitter):
        return beam_splitter_unitary(), "bs"
    if isinstance(elem, WavePlate):
        return hwp_unitary(elem.angle), f"hwp({elem.angle:g})"
    if isinstance(elem, PhaseShift):
        phi = bindings[elem.value] if isinstance(elem.value, str) else elem.value
        return phase_shifter_unitary(float(phi)), f"phase({phi:g})"
    if isinstance(elem, Sagnac):
        return sagnac_unitary(elem.config), f"sagnac({elem.config})"
    raise TypeError(elem)


def compile_bench(program: BenchProgram, bindings=None) -> CompiledBench:
    bindings = dict(bindings or {})
    missing = sorted(program.symbols - bindings.keys())
    if missing:
        raise BenchCompileError(f"unbound symbol(s): {', '.join(missing)}")
    for name in program.symbols:
        if not np.isfinite(bindings[name]):
            raise BenchCompileError(f"symbol {name} bound to non-finite value")
    pol = program.elements[0]
    initial = StateVector.basis(2 * (1 if pol.pol == "H" else 0))
    lowered = [_lower(e, bindings) for e in program.elements[1:-1]]
    return CompiledBench(initial, tuple(u for u, _ in lowered), tuple(lbl for _, lbl in lowered))


DEUTSCH_BENCH = """\
# Deutsch's algorithm bench: source prep, spatial split, PZT phase,
# polarization Hadamard, oracle loop, analyzer Hadamard, PBS2 + D1/D2
polarizer V
bs
phase mode=r value=PHI
hwp angle=22.5
sagnac pbs={pbs} dp={dp}
hwp angle=22.5
measure pol
"""


def deutsch_bench(config: SagnacConfig) -> str:
    return DEUTSCH_BENCH.format(pbs="on" if config.pbs_present else "off", dp=str(config.dp))
