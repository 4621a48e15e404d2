"""Limited-feedback codebooks: Lloyd training, distortion, index selection and file I/O.

A codeword is a complete allocation policy (pairing, modes, absolute powers).  Under a channel
it was not designed for, a relaying pair is scored with the explicit min of its two decoding
constraints, because the source and relay keep transmitting the stored powers.
"""
from __future__ import annotations

import io
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channel import GainSet, as_generator
from .errors import ParameterError
from .model import Allocation, PairPowers, PowerBudget, Scheme, SolverOptions, check_permutation
from .solvers import solve

FORMAT_VERSION = 1
_MAGIC = "# dfrelay codebook"
_RATE_MATRIX_LIMIT = 25_000_000


@dataclass(frozen=True)
class Codeword:
    pairing: np.ndarray
    modes: np.ndarray
    powers: PairPowers

    @classmethod
    def from_allocation(cls, alloc: Allocation) -> "Codeword":
        pw = alloc.powers
        return cls(np.array(alloc.pairing, dtype=np.int64), np.array(alloc.modes, dtype=bool),
                   PairPowers(np.array(pw.p_s1, float), np.array(pw.p_r, float), np.array(pw.p_s2, float)))

    @property
    def n(self) -> int:
        return len(self.pairing)


@dataclass(frozen=True)
class TrainingSet:
    channels: Sequence[GainSet]
    optimal_codes: Sequence[Codeword]

    def __post_init__(self):
        if len(self.channels) != len(self.optimal_codes):
            raise ParameterError("channels and optimal_codes must have equal length")

    def __len__(self) -> int:
        return len(self.channels)


@dataclass(frozen=True)
class Codebook:
    scheme: Scheme
    n: int
    budget: PowerBudget
    bits: int
    entries: tuple
    train_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.entries) != 2 ** self.bits:
            raise ParameterError(f"a {self.bits}-bit codebook needs {2 ** self.bits} entries, got {len(self.entries)}")
        if any(c.n != self.n for c in self.entries):
            raise ParameterError("codeword dimension mismatch")

    @property
    def size(self) -> int:
        return len(self.entries)


# -- batched evaluation ---------------------------------------------------------------

class _CodeArrays:
    def __init__(self, codes: Sequence[Codeword]):
        self.perm = np.array([c.pairing for c in codes], dtype=np.int64)
        self.modes = np.array([c.modes for c in codes], dtype=bool)
        self.p_s1 = np.array([c.powers.p_s1 for c in codes], dtype=float)
        self.p_r = np.array([c.powers.p_r for c in codes], dtype=float)
        self.p_s2 = np.array([c.powers.p_s2 for c in codes], dtype=float)

    def __len__(self):
        return len(self.perm)

    def take(self, idx):
        out = object.__new__(_CodeArrays)
        for name in ("perm", "modes", "p_s1", "p_r", "p_s2"):
            setattr(out, name, getattr(self, name)[idx])
        return out


class _ChannelArrays:
    def __init__(self, channels: Sequence[GainSet]):
        self.sd = np.array([h.lam_sd for h in channels], dtype=float)
        self.sr = np.array([h.lam_sr for h in channels], dtype=float)
        self.rd = np.array([h.lam_rd for h in channels], dtype=float)

    def __len__(self):
        return len(self.sd)


def _rate_block(codes: _CodeArrays, chans: _ChannelArrays, enhanced: bool) -> np.ndarray:
    """(K, M) sum rates; pair terms are accumulated in subcarrier order for every shape."""
    k, n = codes.perm.shape
    out = np.zeros((k, len(chans)))
    for m in range(n):
        col = codes.perm[:, m]
        p1 = codes.p_s1[:, m][:, None]
        pr = codes.p_r[:, m][:, None]
        p2 = codes.p_s2[:, m][:, None]
        sd_m = chans.sd[:, m][None, :]
        sd_n = chans.sd[:, col].T
        rd_n = chans.rd[:, col].T
        relayed = 0.5 * np.minimum(np.log2(1.0 + p1 * chans.sr[:, m][None, :]),
                                   np.log2(1.0 + p1 * sd_m + pr * rd_n))
        idle = 0.5 * np.log2(1.0 + p1 * sd_m)
        if enhanced:
            idle = 0.5 * (np.log2(1.0 + p1 * sd_m) + np.log2(1.0 + p2 * sd_n))
        out += np.where(codes.modes[:, m][:, None], relayed, idle)
    return out


def _rates(codes: _CodeArrays, chans: _ChannelArrays, enhanced: bool, chunk: int = 256) -> np.ndarray:
    blocks = [_rate_block(codes.take(slice(s, s + chunk)), chans, enhanced)
              for s in range(0, len(codes), chunk)]
    return np.vstack(blocks) if blocks else np.zeros((0, len(chans)))


def _self_rates(codes: _CodeArrays, chans: _ChannelArrays, enhanced: bool) -> np.ndarray:
    return np.array([_rate_block(codes.take(slice(i, i + 1)), _slice_chans(chans, i), enhanced)[0, 0]
                     for i in range(len(codes))])


def _slice_chans(chans: _ChannelArrays, i: int) -> _ChannelArrays:
    out = object.__new__(_ChannelArrays)
    out.sd, out.sr, out.rd = chans.sd[i:i + 1], chans.sr[i:i + 1], chans.rd[i:i + 1]
    return out


def _check_dims(n: int, h: GainSet):
    if h.n != n:
        raise ParameterError(f"codeword has N={n} but channel has N={h.n}")


def codeword_rate(c: Codeword, h: GainSet, scheme=Scheme.ENHANCED_SUM) -> float:
    """Sum rate obtained by transmitting codeword ``c``'s stored powers over channel ``h``."""
    _check_dims(c.n, h)
    return float(_rate_block(_CodeArrays([c]), _ChannelArrays([h]), Scheme.parse(scheme).enhanced)[0, 0])


def codebook_rates(C: Codebook, channels: Sequence[GainSet]) -> np.ndarray:
    """(B, M) matrix of codeword rates."""
    for h in channels:
        _check_dims(C.n, h)
    return _rates(_CodeArrays(C.entries), _ChannelArrays(channels), C.scheme.enhanced)


def distortion(C: Codebook, H: TrainingSet) -> float:
    """Mean rate loss of the best codeword relative to each channel's own optimal code."""
    if len(H) == 0:
        raise ParameterError("training set is empty")
    chans = _ChannelArrays(H.channels)
    opt = _self_rates(_CodeArrays(H.optimal_codes), chans, C.scheme.enhanced)
    best = codebook_rates(C, H.channels).max(axis=0)
    return float(np.mean(opt - best))


def select_index(C: Codebook, h: GainSet, budget: PowerBudget | None = None) -> int:
    """Feedback index: the codeword with the largest rate on h, lowest index on ties."""
    if budget is not None and budget != C.budget:
        raise ParameterError(f"codebook was trained for {C.budget}, not {budget}")
    _check_dims(C.n, h)
    return int(np.argmax(codebook_rates(C, [h])[:, 0]))


def build_training_set(channels: Sequence[GainSet], budget: PowerBudget, scheme,
                       opts: SolverOptions | None = None) -> TrainingSet:
    codes = [Codeword.from_allocation(solve(h, budget, scheme, opts)) for h in channels]
    return TrainingSet(list(channels), codes)


def train_codebook(H: TrainingSet, bits: int, eps: float = 1e-6, seed=0, *, scheme=Scheme.ENHANCED_SUM,
                   budget: PowerBudget | None = None, max_iter: int = 100, min_ratio: int = 16) -> Codebook:
    """Lloyd design over the training code set.

    Nearest-neighbour step: each training channel joins the region of its best codeword.
    Centroid step: each codeword becomes the training code with the highest mean rate over its
    region (kept unless strictly beaten).  Stops once distortion improves by less than eps.
    """
    scheme = Scheme.parse(scheme)
    if int(bits) != bits or bits < 0:
        raise ParameterError("bits must be a nonnegative integer")
    if not eps > 0:
        raise ParameterError("eps must be positive")
    B = 2 ** int(bits)
    M = len(H)
    if M < min_ratio * B:
        raise ParameterError(f"training set of {M} is too small for {B} codewords (need >= {min_ratio * B})")
    n = H.channels[0].n
    if budget is None:
        budget = PowerBudget()
    enhanced = scheme.enhanced

    codes = _CodeArrays(H.optimal_codes)
    chans = _ChannelArrays(H.channels)
    opt = _self_rates(codes, chans, enhanced)
    full = _rates(codes, chans, enhanced) if M * M <= _RATE_MATRIX_LIMIT else None

    def rows(idx):
        return full[idx] if full is not None else _rates(codes.take(idx), chans, enhanced)

    def region_scores(assign):
        ind = np.zeros((M, B))
        ind[np.arange(M), assign] = 1.0
        if full is not None:
            return full @ ind
        return np.vstack([_rate_block(codes.take(slice(s, s + 256)), chans, enhanced) @ ind
                          for s in range(0, M, 256)])

    rng = as_generator(seed)
    idx = np.sort(rng.choice(M, size=B, replace=False))
    D = float(np.mean(opt - rows(idx).max(axis=0)))
    trace = [D]
    it = 0
    for it in range(1, max_iter + 1):
        assign = np.argmax(rows(idx), axis=0)
        scores = region_scores(assign)
        new = idx.copy()
        for k in range(B):
            if not np.any(assign == k):
                continue
            cand = int(np.argmax(scores[:, k]))
            if scores[cand, k] > scores[idx[k], k]:
                new[k] = cand
        D_new = float(np.mean(opt - rows(new).max(axis=0)))
        trace.append(D_new)
        improvement = D - D_new
        idx, D = new, D_new
        if improvement < eps:
            break
    meta = {"seed": seed if isinstance(seed, (int, np.integer)) else None, "training_size": M,
            "distortion": D, "trace": trace, "iterations": it, "indices": idx.tolist()}
    entries = tuple(H.optimal_codes[i] for i in idx)
    return Codebook(scheme, n, budget, int(bits), entries, meta)


# -- file format ----------------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def dumps_codebook(C: Codebook) -> str:
    buf = io.StringIO()
    meta = C.train_meta
    buf.write(f"{_MAGIC}\n")
    header = [
        ("format_version", FORMAT_VERSION), ("scheme", C.scheme.value), ("n", C.n), ("bits", C.bits),
        ("budget_total", _fmt(C.budget.total)), ("budget_source", _fmt(C.budget.source)),
        ("budget_relay", _fmt(C.budget.relay)), ("seed", meta.get("seed")),
        ("training_size", meta.get("training_size")),
        ("distortion", _fmt(meta["distortion"]) if meta.get("distortion") is not None else None),
    ]
    for key, val in header:
        buf.write(f"{key} = {'none' if val is None else val}\n")
    for k, c in enumerate(C.entries):
        buf.write(f"\n[codeword {k}]\n")
        buf.write("pairing = " + " ".join(str(int(x)) for x in c.pairing) + "\n")
        buf.write("modes = " + " ".join("1" if x else "0" for x in c.modes) + "\n")
        for name in ("p_s1", "p_r", "p_s2"):
            buf.write(f"{name} = " + " ".join(_fmt(x) for x in getattr(c.powers, name)) + "\n")
    return buf.getvalue()


def loads_codebook(text: str) -> Codebook:
    try:
        return _loads(text)
    except (KeyError, ValueError) as exc:
        if isinstance(exc, ParameterError):
            raise
        raise ParameterError(f"malformed codebook document: {exc!r}") from None


def _loads(text: str) -> Codebook:
    lines = text.splitlines()
    if not lines or lines[0].strip() != _MAGIC:
        raise ParameterError("not a codebook document")
    header: dict[str, str] = {}
    records: list[dict[str, str]] = []
    cur = header
    for raw in lines[1:]:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[codeword"):
            idx = int(line[len("[codeword"):-1])
            if idx != len(records):
                raise ParameterError(f"codeword records out of order at {idx}")
            cur = {}
            records.append(cur)
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise ParameterError(f"malformed line: {raw!r}")
        cur[key.strip()] = val.strip()
    if int(header.get("format_version", -1)) != FORMAT_VERSION:
        raise ParameterError(f"unsupported codebook format version {header.get('format_version')}")

    def opt(key, conv):
        v = header.get(key, "none")
        return None if v == "none" else conv(v)

    n = int(header["n"])
    entries = []
    for rec in records:
        perm = check_permutation([int(x) for x in rec["pairing"].split()])
        modes = np.array([x == "1" for x in rec["modes"].split()], dtype=bool)
        pw = PairPowers(*(np.array([float(x) for x in rec[name].split()]) for name in ("p_s1", "p_r", "p_s2")))
        if len(perm) != n or len(modes) != n or any(len(a) != n for a in (pw.p_s1, pw.p_r, pw.p_s2)):
            raise ParameterError("codeword length does not match header n")
        entries.append(Codeword(perm, modes, pw))
    budget = PowerBudget(float(header["budget_total"]), float(header["budget_source"]), float(header["budget_relay"]))
    meta = {"seed": opt("seed", int), "training_size": opt("training_size", int),
            "distortion": opt("distortion", float)}
    return Codebook(Scheme.parse(header["scheme"]), n, budget, int(header["bits"]), tuple(entries), meta)


def write_codebook(C: Codebook, path) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(dumps_codebook(C))
    except OSError as exc:
        raise OSError(f"cannot write codebook to {os.fspath(path)}: {exc}") from exc


def read_codebook(path) -> Codebook:
    with open(path, encoding="utf-8") as fh:
        return loads_codebook(fh.read())
