"""Line-oriented text formats for clouds, rotation sets, fields, weights and layer configs.

Every writer uses 17 significant digits, single spaces and LF line endings, so
identical inputs give byte-identical files. ``#`` starts a comment anywhere on
a line. Readers reject NaN, Inf and trailing garbage.

Weights::

    WEIGHTS form=se3
    BLOCK lp=<l'> L=<L> D=<d> C=<c> R=<r>
    <(2L+1)*d rows, one per (j, d) pair, each c*r*(2l'+1)*(2L+1) numbers>
    ...
    BIAS D=<d>
    <d numbers>

For ``form=tfn`` the header is ``BLOCK l=<l> lp=<l'> L=<L> D=<d> C=<c> R=<r>`` and
each row holds c*r*(2l+1) numbers. Rows enumerate j (output matrix column) in the
outer loop and d (output channel) in the inner loop; the numbers of a row follow
C order over the remaining axes (channel, radial, order index, and for se3 the
SO(3) column M last).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .conv import SE3Weights, TFNWeights
from .errors import BlockHeaderMismatch, ParseError
from .fields import FeatureField
from .harmonics import check_rotation
from .kernels import KernelBasisSpec
from .sampling import RotationSampleSet, exact_euler_grid, fps_rotations, icosahedral_group


def fmt(v: float) -> str:
    return "%.17g" % float(v)


def fmt_row(values) -> str:
    return " ".join(fmt(v) for v in np.ravel(values))


def _lines(text: str) -> Iterator[tuple[int, str]]:
    """Non-blank lines with comments removed, tagged with 1-based line numbers."""
    for n, raw in enumerate(text.split("\n"), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield n, line


def parse_float(tok: str, lineno: int = 0) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise ParseError(f"line {lineno}: not a number: {tok!r}") from None
    if not math.isfinite(v):
        raise ParseError(f"line {lineno}: non-finite value {tok!r}")
    return v


def parse_int(tok: str, lineno: int = 0) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"line {lineno}: not an integer: {tok!r}") from None


def _numbers(line: str, lineno: int, count: int | None = None) -> list[float]:
    vals = [parse_float(t, lineno) for t in line.split()]
    if count is not None and len(vals) != count:
        raise ParseError(f"line {lineno}: expected {count} numbers, found {len(vals)}")
    return vals


def read_text(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            return fh.read()
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e.strerror}") from None
    except UnicodeDecodeError:
        raise ParseError(f"{path} is not UTF-8 text") from None


def write_text(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as e:
        raise ParseError(f"cannot write {path}: {e.strerror}") from None


# ---------------------------------------------------------------------------
# Point clouds and rotation sets


def parse_cloud(text: str) -> np.ndarray:
    pts = [_numbers(line, n, 3) for n, line in _lines(text)]
    if not pts:
        raise ParseError("point cloud is empty")
    return np.array(pts)


def format_cloud(points: np.ndarray) -> str:
    return "".join(fmt_row(p) + "\n" for p in points)


def format_rotation_set(s: RotationSampleSet) -> str:
    return "".join(fmt_row(np.append(r.ravel(), w)) + "\n" for r, w in zip(s.rotations, s.weights))


def parse_rotation_set(text: str, tol=None) -> RotationSampleSet:
    rows = [_numbers(line, n, 10) for n, line in _lines(text)]
    if not rows:
        raise ParseError("rotation set is empty")
    arr = np.array(rows)
    rots = arr[:, :9].reshape(-1, 3, 3)
    for r in rots:
        check_rotation(r, tol)
    if (arr[:, 9] < 0).any():
        raise ParseError("rotation weights must be nonnegative")
    return RotationSampleSet(rots.copy(), arr[:, 9].copy(), "file")


# ---------------------------------------------------------------------------
# Feature fields


def format_field(f: FeatureField) -> str:
    chans = " ".join(f"{l}:{c}" for l, c in enumerate(f.channels))
    out = [f"FIELD N={f.n_points} LMAX={f.max_degree} CHANNELS {chans}\n"]
    for i in range(f.n_points):
        for l, b in enumerate(f.blocks):
            for c in range(b.shape[3]):
                out.append(f"POINT {i} L {l} C {c}\n")
                out.extend(fmt_row(row) + "\n" for row in b[i, :, :, c])
    return "".join(out)


def _keyvals(tokens: list[str], lineno: int) -> dict[str, str]:
    out = {}
    for t in tokens:
        if "=" not in t:
            raise ParseError(f"line {lineno}: expected key=value, found {t!r}")
        k, v = t.split("=", 1)
        if k in out:
            raise ParseError(f"line {lineno}: repeated key {k!r}")
        out[k] = v
    return out


def parse_field(text: str) -> FeatureField:
    lines = list(_lines(text))
    if not lines:
        raise ParseError("field file is empty")
    n0, head = lines[0]
    toks = head.split()
    if len(toks) < 4 or toks[0] != "FIELD" or toks[3] != "CHANNELS":
        raise ParseError(f"line {n0}: expected 'FIELD N=<n> LMAX=<l> CHANNELS ...'")
    kv = _keyvals(toks[1:3], n0)
    if set(kv) != {"N", "LMAX"}:
        raise ParseError(f"line {n0}: FIELD header needs N= and LMAX=")
    n, lmax = parse_int(kv["N"], n0), parse_int(kv["LMAX"], n0)
    if n < 1 or lmax < 0:
        raise ParseError(f"line {n0}: N must be >= 1 and LMAX >= 0")
    chans = {}
    for t in toks[4:]:
        l, _, c = t.partition(":")
        chans[parse_int(l, n0)] = parse_int(c, n0)
    if sorted(chans) != list(range(lmax + 1)) or min(chans.values()) < 1:
        raise ParseError(f"line {n0}: CHANNELS must list l:c for l = 0..{lmax} with c >= 1")
    blocks = [np.zeros((n, 2 * l + 1, 2 * l + 1, chans[l])) for l in range(lmax + 1)]
    seen = set()
    k = 1
    while k < len(lines):
        ln, line = lines[k]
        t = line.split()
        if len(t) != 6 or t[0] != "POINT" or t[2] != "L" or t[4] != "C":
            raise ParseError(f"line {ln}: expected 'POINT i L l C c'")
        i, l, c = parse_int(t[1], ln), parse_int(t[3], ln), parse_int(t[5], ln)
        if not (0 <= i < n and 0 <= l <= lmax and 0 <= c < chans[l]):
            raise ParseError(f"line {ln}: block index out of range")
        if (i, l, c) in seen:
            raise ParseError(f"line {ln}: duplicate block")
        seen.add((i, l, c))
        rows = lines[k + 1:k + 2 + 2 * l]
        if len(rows) != 2 * l + 1:
            raise ParseError(f"line {ln}: block truncated")
        for a, (rn, rl) in enumerate(rows):
            blocks[l][i, a, :, c] = _numbers(rl, rn, 2 * l + 1)
        k += 2 + 2 * l
    expected = n * sum(chans.values())
    if len(seen) != expected:
        raise ParseError(f"field lists {len(seen)} blocks, expected {expected}")
    return FeatureField(blocks)


# ---------------------------------------------------------------------------
# Weights


def format_weights(w: SE3Weights | TFNWeights) -> str:
    if isinstance(w, SE3Weights):
        out = ["WEIGHTS form=se3\n"]
        for (lp, L), b in sorted(w.blocks.items()):
            out.append(f"BLOCK lp={lp} L={L} D={b.shape[1]} C={b.shape[2]} R={b.shape[3]}\n")
            out.extend(fmt_row(row) + "\n" for row in b.reshape(b.shape[0] * b.shape[1], -1))
    else:
        out = ["WEIGHTS form=tfn\n"]
        for (l, lp, L), b in sorted(w.blocks.items()):
            out.append(f"BLOCK l={l} lp={lp} L={L} D={b.shape[1]} C={b.shape[2]} R={b.shape[3]}\n")
            out.extend(fmt_row(row) + "\n" for row in b.reshape(b.shape[0] * b.shape[1], -1))
    out.append(f"BIAS D={len(w.bias)}\n")
    out.append(fmt_row(w.bias) + "\n")
    return "".join(out)


def _block_keys(form: str) -> tuple[str, ...]:
    return ("lp", "L", "D", "C", "R") if form == "se3" else ("l", "lp", "L", "D", "C", "R")


def parse_weights(text: str) -> SE3Weights | TFNWeights:
    """Parse a weight file; raises ParseError on syntax and BlockHeaderMismatch when
    a header disagrees with the form or with its body. TFN blocks violating the
    triangle rule raise TriangleViolation."""
    lines = list(_lines(text))
    if not lines:
        raise ParseError("weight file is empty")
    n0, head = lines[0]
    toks = head.split()
    if len(toks) != 2 or toks[0] != "WEIGHTS" or toks[1] not in ("form=se3", "form=tfn"):
        raise ParseError(f"line {n0}: expected 'WEIGHTS form=se3' or 'WEIGHTS form=tfn'")
    form = toks[1][5:]
    keys = _block_keys(form)
    blocks: dict = {}
    bias = None
    k = 1
    while k < len(lines):
        ln, line = lines[k]
        t = line.split()
        if bias is not None:
            raise ParseError(f"line {ln}: content after BIAS")
        if t[0] == "BIAS":
            kv = _keyvals(t[1:], ln)
            if set(kv) != {"D"} or k + 1 >= len(lines):
                raise ParseError(f"line {ln}: expected 'BIAS D=<d>' followed by one row")
            d = parse_int(kv["D"], ln)
            rn, rl = lines[k + 1]
            bias = np.array(_numbers(rl, rn, d))
            k += 2
            continue
        if t[0] != "BLOCK":
            raise ParseError(f"line {ln}: expected BLOCK or BIAS")
        kv = _keyvals(t[1:], ln)
        if tuple(sorted(kv)) != tuple(sorted(keys)):
            raise BlockHeaderMismatch(f"line {ln}: {form} block header needs keys {' '.join(keys)}")
        idx = {key: parse_int(kv[key], ln) for key in keys}
        if min(idx.values()) < 0 or min(idx["D"], idx["C"], idx["R"]) < 1:
            raise BlockHeaderMismatch(f"line {ln}: block header has invalid sizes")
        L, d, c, r, lp = idx["L"], idx["D"], idx["C"], idx["R"], idx["lp"]
        if form == "se3":
            key = (lp, L)
            shape = (2 * L + 1, d, c, r, 2 * lp + 1, 2 * L + 1)
        else:
            key = (idx["l"], lp, L)
            shape = (2 * L + 1, d, c, r, 2 * idx["l"] + 1)
        if key in blocks:
            raise BlockHeaderMismatch(f"line {ln}: duplicate block {key}")
        n_rows = shape[0] * shape[1]
        width = int(np.prod(shape[2:]))
        rows = lines[k + 1:k + 1 + n_rows]
        if len(rows) != n_rows:
            raise BlockHeaderMismatch(f"line {ln}: block declares {n_rows} rows, file ends early")
        vals = []
        for rn, rl in rows:
            if rl.split()[0] in ("BLOCK", "BIAS"):
                raise BlockHeaderMismatch(f"line {rn}: block {key} has fewer rows than its header declares")
            row = _numbers(rl, rn)
            if len(row) != width:
                raise BlockHeaderMismatch(f"line {rn}: row has {len(row)} numbers, header implies {width}")
            vals.append(row)
        blocks[key] = np.array(vals).reshape(shape)
        k += 1 + n_rows
    if bias is None:
        raise ParseError("weight file has no BIAS block")
    if any(b.shape[1] != len(bias) for b in blocks.values()):
        raise BlockHeaderMismatch("block output channel counts disagree with BIAS")
    return SE3Weights(blocks, bias) if form == "se3" else TFNWeights(blocks, bias)


# ---------------------------------------------------------------------------
# Layer configuration


@dataclass
class LayerConfig:
    form: str
    weights_path: str
    kernel: KernelBasisSpec
    lmax_out: int | None = None
    activation: str = "none"
    activation_set: str = "ico"
    truncate: int | None = None
    exclude_self: bool = False


_CONFIG_KEYS = {"form", "weights", "kernel", "kernel_max_degree", "radial_count", "support_radius",
                "sigma", "lmax_out", "activation", "activation_set", "truncate", "exclude_self"}


def _parse_bool(v: str, ln: int) -> bool:
    if v.lower() in ("true", "yes", "1"):
        return True
    if v.lower() in ("false", "no", "0"):
        return False
    raise ParseError(f"line {ln}: expected a boolean, found {v!r}")


def parse_layer_config(text: str, base_dir: str = ".") -> LayerConfig:
    """Flat ``key = value`` config; relative weight paths resolve against ``base_dir``."""
    kv: dict[str, tuple[int, str]] = {}
    for ln, line in _lines(text):
        key, sep, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if not sep or not key or not val or " " in key:
            raise ParseError(f"line {ln}: expected 'key = value'")
        if key not in _CONFIG_KEYS:
            raise ParseError(f"line {ln}: unknown key {key!r}")
        if key in kv:
            raise ParseError(f"line {ln}: repeated key {key!r}")
        kv[key] = (ln, val)
    for req in ("form", "weights", "kernel_max_degree", "radial_count"):
        if req not in kv:
            raise ParseError(f"config is missing {req!r}")

    def get_int(key, default=None):
        if key not in kv:
            return default
        ln, v = kv[key]
        return parse_int(v, ln)

    def get_float(key, default=None):
        if key not in kv:
            return default
        ln, v = kv[key]
        return parse_float(v, ln)

    form = kv["form"][1]
    if form not in ("se3", "tfn"):
        raise ParseError(f"line {kv['form'][0]}: form must be se3 or tfn")
    kind = kv.get("kernel", (0, "gaussian"))[1]
    lmax_k, count = get_int("kernel_max_degree"), get_int("radial_count")
    support = get_float("support_radius", 1.0)
    if lmax_k < 0 or count < 1 or support <= 0:
        raise ParseError("kernel_max_degree >= 0, radial_count >= 1 and support_radius > 0 required")
    if kind == "gaussian":
        spec = KernelBasisSpec.gaussian(lmax_k, count, support, get_float("sigma"))
    elif kind == "zernike":
        spec = KernelBasisSpec.zernike(lmax_k, count, support)
    else:
        raise ParseError(f"line {kv['kernel'][0]}: kernel must be gaussian or zernike")
    act = kv.get("activation", (0, "none"))[1]
    if act not in ("none", "relu"):
        raise ParseError(f"line {kv['activation'][0]}: activation must be none or relu")
    act_set = kv.get("activation_set", (0, "ico"))[1]
    _split_set_name(act_set)
    path = kv["weights"][1]
    if not os.path.isabs(path):
        path = os.path.join(base_dir, path)
    excl = False
    if "exclude_self" in kv:
        ln, v = kv["exclude_self"]
        excl = _parse_bool(v, ln)
    return LayerConfig(form, path, spec, get_int("lmax_out"), act, act_set, get_int("truncate"), excl)


def _split_set_name(name: str) -> tuple[str, int]:
    kind, _, arg = name.partition(":")
    if kind == "ico" and not arg:
        return kind, 60
    if kind in ("fps", "grid") and arg:
        k = parse_int(arg)
        if k >= 1:
            return kind, k
    raise ParseError(f"unknown rotation set {name!r}; use ico, fps:<n> or grid:<B>")


def parse_sample_set_name(name: str, seed: int = 0) -> RotationSampleSet:
    """``ico``, ``fps:<n>`` or ``grid:<B>``."""
    kind, k = _split_set_name(name)
    if kind == "ico":
        return icosahedral_group()
    return fps_rotations(k, seed) if kind == "fps" else exact_euler_grid(k)
