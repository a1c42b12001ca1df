"""FVC-style evaluation harness: synthetic datasets on disk, protocol runs,
impostor unlocking statistics and the closed-form table layouts.

Dataset layout (I, J are 1-based)::

    finger<I>_imp<J>.txt    template text
    finger<I>_imp<J>.tf     optional "dx dy rotation cx cy": master frame -> impression
    finger<I>_imp<J>.desc   optional descriptors, one hex word per template minutia
    dataset.json            optional generation metadata

Genuine attempts are aligned with the ground-truth transforms; impostor
attempts are not aligned. Per-attempt seeds derive from (seed, finger,
impression indices), so a run is reproducible regardless of worker count.
"""
from __future__ import annotations

import itertools
import json
import math
import os
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field as dc_field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import records
from .attacks import fa_cost_randomized_decoder
from .bch import CODES, code_by_name
from .classic import (ClassicVault, ClassicVaultParams, build_unlocking_set, deserialize_vault,
                      enroll_classic, serialize_vault)
from .decoding import DecodeResult, UnlockingSet, decode_exhaustive, randomized_decode
from .descriptor import (DEFAULT_R, DescriptorVault, build_hardened_unlocking_set,
                         deserialize_descriptor_vault, enroll_descriptor, hardened_bf_log2,
                         load_descriptors, noisy_descriptor, random_descriptor,
                         save_descriptors, serialize_descriptor_vault)
from .errors import DatasetError, FailureToCapture, VaultFormatError
from .field import Polynomial
from .grid import (DEFAULT_D, GridParams, GridVault, deserialize_grid_vault, extract_feature_set,
                   grid_enroll, grid_unlocking_set, serialize_grid_vault)
from .minutiae import (FVC_HEIGHT, FVC_WIDTH, IDENTITY, MinutiaeTemplate, RigidTransform,
                       apply_transform, impression_with_origin, random_transform,
                       synthesize_finger)
from .security import bf_log2, expected_bf_iterations, expected_bf_log2
from .stats import (ConfidenceInterval, TrialRecord, clopper_pearson, median_trials,
                    point_estimate, rule_of_three)

SCHEMES = ("classic", "descriptor", "grid")
DECODERS = ("exhaustive", "randomized")
CORES_ENV = "FVAULT_CORES"
META_FILE = "dataset.json"
_NAME = re.compile(r"^finger(\d+)_imp(\d+)\.txt$")


def default_cores() -> int:
    """Core count for cost estimates: $FVAULT_CORES, else 1."""
    raw = os.environ.get(CORES_ENV)
    if raw is None:
        return 1
    try:
        cores = int(raw)
    except ValueError:
        raise ValueError(f"{CORES_ENV} must be a positive integer, got {raw!r}") from None
    if cores < 1:
        raise ValueError(f"{CORES_ENV} must be a positive integer, got {raw!r}")
    return cores


def derive_seed(*parts: int) -> int:
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


# ---------------------------------------------------------------------------
# dataset files

def template_path(root, finger: int, imp: int) -> Path:
    return Path(root) / f"finger{finger}_imp{imp}.txt"


def save_transform(path, T: RigidTransform) -> None:
    cx, cy = T.center
    Path(path).write_text(f"{T.dx!r} {T.dy!r} {T.rotation!r} {cx!r} {cy!r}\n", encoding="utf-8")


def load_transform(path) -> RigidTransform:
    vals = Path(path).read_text(encoding="utf-8").split()
    if len(vals) != 5:
        raise DatasetError(f"{path}: expected 'dx dy rotation cx cy'")
    try:
        dx, dy, rot, cx, cy = (float(v) for v in vals)
    except ValueError:
        raise DatasetError(f"{path}: non-numeric transform") from None
    return RigidTransform(dx, dy, rot, (cx, cy))


@dataclass(frozen=True)
class Impression:
    finger: int
    index: int
    template: MinutiaeTemplate
    transform: RigidTransform = IDENTITY
    descriptors: Optional[tuple[int, ...]] = None


@dataclass(frozen=True)
class Dataset:
    root: Path
    fingers: dict
    meta: dict = dc_field(default_factory=dict)

    @property
    def finger_ids(self) -> list[int]:
        return sorted(self.fingers)

    def impressions(self, finger: int) -> list[Impression]:
        return self.fingers[finger]

    def genuine_pairs_expected(self) -> int:
        return sum(math.comb(len(v), 2) for v in self.fingers.values())

    def impostor_pairs_expected(self) -> int:
        return math.comb(len(self.fingers), 2)


def load_dataset(root) -> Dataset:
    root = Path(root)
    if not root.is_dir():
        raise DatasetError(f"{root}: not a directory")
    found: dict[int, dict[int, Path]] = {}
    for p in root.iterdir():
        m = _NAME.match(p.name)
        if m:
            found.setdefault(int(m.group(1)), {})[int(m.group(2))] = p
    if not found:
        raise DatasetError(f"{root}: no finger<I>_imp<J>.txt files")
    meta = {}
    if (root / META_FILE).exists():
        try:
            meta = json.loads((root / META_FILE).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise DatasetError(f"{root / META_FILE}: {exc}") from None
    m_bits = meta.get("descriptor_bits")
    fingers = {}
    for fi in sorted(found):
        imps = []
        for ii in sorted(found[fi]):
            path = found[fi][ii]
            try:
                t = MinutiaeTemplate.load(path)
            except (OSError, ValueError) as exc:
                raise DatasetError(f"{path}: {exc}") from None
            tf = path.with_suffix(".tf")
            T = load_transform(tf) if tf.exists() else IDENTITY
            dpath = path.with_suffix(".desc")
            desc = None
            if dpath.exists():
                try:
                    desc = tuple(load_descriptors(dpath, m_bits))
                except (OSError, ValueError) as exc:
                    raise DatasetError(f"{dpath}: {exc}") from None
                if len(desc) != len(t):
                    raise DatasetError(f"{dpath}: {len(desc)} descriptors for {len(t)} minutiae")
            imps.append(Impression(fi, ii, t, T, desc))
        fingers[fi] = imps
    return Dataset(root, fingers, meta)


@dataclass(frozen=True)
class SynthConfig:
    fingers: int = 100
    impressions: int = 8
    minutiae: int = 40
    pos_noise: float = 1.0
    ang_noise: float = 2.0
    drop_rate: float = 0.05
    spurious: int = 0
    max_rotation: float = 0.0
    max_shift: float = 0.0
    width: float = FVC_WIDTH
    height: float = FVC_HEIGHT
    # descriptor length in bits; 0 writes no descriptor files
    descriptor_bits: int = 0
    descriptor_ber: float = 0.0


def synthesize_dataset(root, cfg: SynthConfig = SynthConfig(), seed: int = 0) -> Dataset:
    """Write a synthetic population: one master per finger, noisy transformed
    impressions of it, transform sidecars and (optionally) descriptors."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    m = cfg.descriptor_bits
    for fi in range(1, cfg.fingers + 1):
        master = synthesize_finger(derive_seed(seed, fi, 0, 0), cfg.minutiae, cfg.width, cfg.height)
        drng = np.random.default_rng(derive_seed(seed, fi, 0, 1))
        master_desc = [random_descriptor(drng, m) for _ in range(len(master))] if m else None
        for ii in range(1, cfg.impressions + 1):
            rng = np.random.default_rng(derive_seed(seed, fi, ii, 0))
            T = random_transform(rng, cfg.max_rotation, cfg.max_shift, cfg.width, cfg.height)
            t, origin = impression_with_origin(master, derive_seed(seed, fi, ii, 1), cfg.pos_noise,
                                               cfg.ang_noise, cfg.drop_rate, cfg.spurious, T)
            path = template_path(root, fi, ii)
            t.save(path)
            save_transform(path.with_suffix(".tf"), T)
            if m:
                qrng = np.random.default_rng(derive_seed(seed, fi, ii, 2))
                desc = [noisy_descriptor(master_desc[o], m, cfg.descriptor_ber, qrng) if o >= 0
                        else random_descriptor(qrng, m) for o in origin]
                save_descriptors(path.with_suffix(".desc"), desc, m)
    meta = {"generator": "synthetic", "seed": seed, **asdict(cfg)}
    if m:
        meta["descriptor_bits"] = m
    (root / META_FILE).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return load_dataset(root)


def align_to(query: Impression, reference: Impression) -> MinutiaeTemplate:
    """Map ``query`` into ``reference``'s frame via the master frame."""
    if query.transform == reference.transform:
        return query.template
    return apply_transform(query.template, query.transform.inverse().then(reference.transform))


# ---------------------------------------------------------------------------
# schemes

@dataclass(frozen=True)
class SchemeConfig:
    scheme: str = "classic"
    classic: ClassicVaultParams = ClassicVaultParams()
    grid: GridParams = GridParams()
    code: str = "BCH(511,19)"
    # None picks the scheme's own decoder: randomized for grid, exhaustive otherwise
    decoder: Optional[str] = None
    D: int = DEFAULT_D
    budget: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        if self.decoder is not None and self.decoder not in DECODERS:
            raise ValueError(f"decoder must be one of {DECODERS}")
        if self.D < 1:
            raise ValueError("D must be positive")
        if self.budget is not None and self.budget < 1:
            raise ValueError("budget must be positive")
        code_by_name(self.code)

    @property
    def decoder_name(self) -> str:
        if self.decoder is not None:
            return self.decoder
        return "randomized" if self.scheme == "grid" else "exhaustive"

    @property
    def k(self) -> int:
        return self.grid.k if self.scheme == "grid" else self.classic.k

    def to_dict(self) -> dict:
        d = {"scheme": self.scheme, "decoder": self.decoder_name, "seed": self.seed,
             "budget": self.budget}
        if self.scheme == "grid":
            d["grid"] = asdict(self.grid)
        else:
            d["classic"] = asdict(self.classic)
        if self.scheme == "descriptor":
            d["code"] = self.code
        if self.decoder_name == "randomized":
            d["D"] = self.D
        return d


def enroll_record(cfg: SchemeConfig, imp: Impression, secret: Polynomial, seed: int):
    """Vault record for one impression. Raises FailureToCapture and friends."""
    if cfg.scheme == "classic":
        return enroll_classic(imp.template, cfg.classic, secret, seed)
    if cfg.scheme == "grid":
        return grid_enroll(imp.template, cfg.grid, secret, seed)
    if imp.descriptors is None:
        raise DatasetError(f"finger {imp.finger} impression {imp.index} has no descriptors")
    return enroll_descriptor(imp.template, imp.descriptors, cfg.classic, secret, seed,
                             code_by_name(cfg.code))


def query_unlocking_set(cfg: SchemeConfig, record, query: MinutiaeTemplate,
                        descriptors: Optional[Sequence[int]] = None) -> UnlockingSet:
    if cfg.scheme == "classic":
        return build_unlocking_set(record, query)
    if cfg.scheme == "grid":
        return grid_unlocking_set(record, query)
    if descriptors is None:
        raise DatasetError("descriptor scheme needs query descriptors")
    return build_hardened_unlocking_set(record, query, descriptors)


def decode(cfg: SchemeConfig, u: UnlockingSet, digest: bytes, seed: int) -> DecodeResult:
    if cfg.decoder_name == "randomized":
        iters = cfg.D if cfg.budget is None else min(cfg.D, cfg.budget)
        return randomized_decode(u, cfg.k, iters, digest, seed)
    return decode_exhaustive(u, cfg.k, digest, cfg.budget)


def scheme_of(record) -> str:
    if isinstance(record, ClassicVault):
        return "classic"
    if isinstance(record, DescriptorVault):
        return "descriptor"
    if isinstance(record, GridVault):
        return "grid"
    raise TypeError(f"not a vault record: {type(record).__name__}")


def serialize_record(record) -> bytes:
    return {"classic": serialize_vault, "descriptor": serialize_descriptor_vault,
            "grid": serialize_grid_vault}[scheme_of(record)](record)


def deserialize_record(data: bytes):
    kind = records.read_kind(data)
    readers = {records.KIND_CLASSIC: deserialize_vault,
               records.KIND_DESCRIPTOR: deserialize_descriptor_vault,
               records.KIND_GRID: deserialize_grid_vault}
    if kind not in readers:
        raise VaultFormatError(f"unknown record kind {kind}")
    return readers[kind](data)


def config_for(record, decoder: Optional[str] = None, D: int = DEFAULT_D,
               budget: Optional[int] = None, seed: int = 0) -> SchemeConfig:
    """SchemeConfig matching a loaded record's own parameters."""
    scheme = scheme_of(record)
    if scheme == "grid":
        return SchemeConfig("grid", grid=record.params, decoder=decoder, D=D, budget=budget, seed=seed)
    code = record.code.name if scheme == "descriptor" else "BCH(511,19)"
    return SchemeConfig(scheme, classic=record.params, code=code, decoder=decoder, D=D,
                        budget=budget, seed=seed)


def verify_record(cfg: SchemeConfig, record, query: MinutiaeTemplate,
                  descriptors: Optional[Sequence[int]] = None, seed: int = 0):
    """(DecodeResult, seconds); the clock runs from query ingestion to decision."""
    t0 = time.perf_counter()
    u = query_unlocking_set(cfg, record, query, descriptors)
    res = decode(cfg, u, record.digest, seed)
    return res, time.perf_counter() - t0


# ---------------------------------------------------------------------------
# FVC protocol

@dataclass(frozen=True)
class Attempt:
    genuine: bool
    enrolled: tuple[int, int]
    query: tuple[int, int]
    accepted: bool
    iterations: int
    seconds: float


@dataclass
class EvaluationReport:
    config: dict
    genuine_accepts: int
    genuine_trials: int
    sub_genuine_accepts: int
    sub_genuine_trials: int
    false_accepts: int
    impostor_trials: int
    enrollments: int
    failures_to_capture: int
    genuine_pairs_expected: int
    impostor_pairs_expected: int
    gdt: float
    idt: float

    @staticmethod
    def _rate(s: int, n: int) -> Optional[float]:
        return s / n if n else None

    @property
    def gar(self):
        return self._rate(self.genuine_accepts, self.genuine_trials)

    @property
    def sub_gar(self):
        return self._rate(self.sub_genuine_accepts, self.sub_genuine_trials)

    @property
    def far(self):
        return self._rate(self.false_accepts, self.impostor_trials)

    @property
    def ftcr(self):
        return self._rate(self.failures_to_capture, self.enrollments)

    def far_interval(self, level: float = 0.95) -> Optional[ConfidenceInterval]:
        return far_interval(self.false_accepts, self.impostor_trials, level)

    def row(self) -> dict:
        """One-line summary: rates, FAR interval and timings."""
        ci = self.far_interval()
        return {"k": self.config.get("grid", self.config.get("classic", {})).get("k"),
                "gar": self.gar, "sub_gar": self.sub_gar, "far": self.far,
                "far_ci": None if ci is None else [ci.lower, ci.upper],
                "gdt": self.gdt, "idt": self.idt, "ftcr": self.ftcr}

    def to_dict(self, timings: bool = True) -> dict:
        ci = self.far_interval()
        d = {
            "config": self.config,
            "genuine": {"accepts": self.genuine_accepts, "trials": self.genuine_trials,
                        "rate": self.gar},
            "sub_genuine": {"accepts": self.sub_genuine_accepts,
                            "trials": self.sub_genuine_trials, "rate": self.sub_gar},
            "impostor": {"accepts": self.false_accepts, "trials": self.impostor_trials,
                         "rate": self.far,
                         "ci95": None if ci is None else [ci.lower, ci.upper]},
            "enrollment": {"attempts": self.enrollments,
                           "failures_to_capture": self.failures_to_capture, "ftcr": self.ftcr},
            "expected_pairs": {"genuine": self.genuine_pairs_expected,
                               "impostor": self.impostor_pairs_expected},
        }
        if timings:
            d["timings"] = {"gdt": self.gdt, "idt": self.idt}
        return d


def far_interval(s: int, n: int, level: float = 0.95) -> Optional[ConfidenceInterval]:
    """Clopper-Pearson, or the rule of three when nothing was accepted."""
    if n < 1:
        return None
    if s == 0 and level == 0.95:
        return rule_of_three(n)
    return clopper_pearson(TrialRecord(s, n), level)


def _enrollment_jobs(ds: Dataset):
    """One job per enrolled impression: its genuine and impostor queries."""
    fingers = ds.finger_ids
    jobs = {}
    for fi in fingers:
        imps = ds.impressions(fi)
        for a, b in itertools.combinations(range(len(imps)), 2):
            jobs.setdefault((fi, a), ([], []))[0].append((fi, b))
    for x, y in itertools.combinations(fingers, 2):
        jobs.setdefault((x, 0), ([], []))[1].append((y, 0))
    return jobs


def _run_job(args):
    cfg, ref, genuine, impostor = args
    seed = cfg.seed
    secret = Polynomial.random(cfg.k, np.random.default_rng(derive_seed(seed, ref.finger, ref.index, 0)))
    try:
        record = enroll_record(cfg, ref, secret, derive_seed(seed, ref.finger, ref.index, 1))
    except FailureToCapture:
        return None
    out = []
    for is_genuine, queries in ((True, genuine), (False, impostor)):
        for q in queries:
            query = align_to(q, ref) if is_genuine else q.template
            s = derive_seed(seed, ref.finger, ref.index, q.finger, q.index, 2)
            res, secs = verify_record(cfg, record, query, q.descriptors, s)
            if res.success and res.secret != secret:
                raise AssertionError("decoder accepted a polynomial other than the secret")
            out.append(Attempt(is_genuine, (ref.finger, ref.index), (q.finger, q.index),
                               res.success, res.attempts, secs))
    return out


def run_fvc_protocol(dataset, config: SchemeConfig, workers: int = 1,
                     attempts_out: Optional[list] = None) -> EvaluationReport:
    """Genuine attempts pair impressions i < j of each finger (i enrolled, j
    aligned to it); impostor attempts pair first impressions of fingers I < J.
    Attempts whose enrollment fails to capture are not counted as trials.
    ``attempts_out`` receives the per-attempt records when given."""
    ds = dataset if isinstance(dataset, Dataset) else load_dataset(dataset)
    jobs = _enrollment_jobs(ds)
    args = []
    for (fi, a), (gen, imp) in sorted(jobs.items()):
        ref = ds.impressions(fi)[a]
        args.append((config, ref, [ds.impressions(f)[b] for f, b in gen],
                     [ds.impressions(f)[b] for f, b in imp]))
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            results = list(ex.map(_run_job, args, chunksize=max(1, len(args) // (4 * workers))))
    else:
        results = [_run_job(a) for a in args]

    attempts = [a for r in results if r is not None for a in r]
    if attempts_out is not None:
        attempts_out.extend(attempts)
    gen = [a for a in attempts if a.genuine]
    imp = [a for a in attempts if not a.genuine]
    first_two = {(f, ims[0].index, ims[1].index) for f in ds.finger_ids
                 for ims in [ds.impressions(f)] if len(ims) >= 2}
    sub = [a for a in gen if (a.enrolled[0], a.enrolled[1], a.query[1]) in first_two]
    return EvaluationReport(
        config=config.to_dict(),
        genuine_accepts=sum(a.accepted for a in gen), genuine_trials=len(gen),
        sub_genuine_accepts=sum(a.accepted for a in sub), sub_genuine_trials=len(sub),
        false_accepts=sum(a.accepted for a in imp), impostor_trials=len(imp),
        enrollments=len(results), failures_to_capture=sum(r is None for r in results),
        genuine_pairs_expected=ds.genuine_pairs_expected(),
        impostor_pairs_expected=ds.impostor_pairs_expected(),
        gdt=float(np.mean([a.seconds for a in gen])) if gen else 0.0,
        idt=float(np.mean([a.seconds for a in imp])) if imp else 0.0,
    )


def report_json(report: EvaluationReport, timings: bool = True) -> str:
    return json.dumps(report.to_dict(timings), indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# impostor unlocking statistics for the randomized decoder

@dataclass
class UnlockingStats:
    grid: dict
    pairs: list
    stats: list
    rows: list

    def to_dict(self) -> dict:
        return asdict(self)


def run_unlocking_stats(dataset, grid: GridParams, ks: Sequence[int] = range(7, 13),
                        D: int = DEFAULT_D, idt: Optional[dict] = None,
                        cores: int = 1) -> UnlockingStats:
    """(t_i, omega_i) for every impostor pair of first impressions, with A
    quantized from finger I and B from finger J, then the false-accept cost
    per k. ``idt`` maps k to the seconds taken by D decoder iterations."""
    ds = dataset if isinstance(dataset, Dataset) else load_dataset(dataset)
    feats = {f: extract_feature_set(ds.impressions(f)[0].template, grid.grid, grid.s, grid.t_max)
             for f in ds.finger_ids}
    pairs, stats = [], []
    for x, y in itertools.combinations(ds.finger_ids, 2):
        a, b = feats[x], feats[y]
        pairs.append([x, y])
        stats.append([len(b), len(a & b)])
    rows = []
    for k in ks:
        far1, _ = fa_cost_randomized_decoder(stats, k, 1)
        far_d, _ = fa_cost_randomized_decoder(stats, k, D)
        row = {"k": k, "far_single": far1, "far_per_query": far_d,
               "queries": median_trials(far1) if far1 > 0 else math.inf}
        if idt and k in idt and far1 > 0:
            row["seconds"] = fa_attack_seconds(far1, idt[k], cores, D)
        rows.append(row)
    return UnlockingStats(asdict(grid), pairs, stats, rows)


def fa_attack_seconds(far_single: float, idt: float, cores: int = 1, D: int = DEFAULT_D) -> float:
    """Time for a false-accept attack on the randomized decoder: median count
    of single iterations, priced at ``idt`` seconds per D iterations."""
    return median_trials(far_single) / D * idt / cores


# ---------------------------------------------------------------------------
# closed-form tables

# (n, t, k, iterations per second per core)
TABLE2 = [(218, 18, 9, 151316.5), (224, 24, 9, 148634.1), (224, 24, 8, 183188.8),
          (224, 24, 9, 148634.1), (224, 24, 11, 109066.9), (440, 40, 13, 82056.84),
          (440, 40, 14, 69227.56)]
# (k, false accepts, impostor trials, IDT seconds)
TABLE4 = [(7, 188, 4856, 0.08), (8, 79, 4856, 0.140), (9, 27, 4856, 0.198),
          (10, 8, 4856, 0.240), (11, 5, 4856, 0.248), (12, 0, 4856, 0.193)]
# (k, single-iteration FAR, IDT seconds per 2^16 iterations)
TABLE5 = [(7, 8.31e-8, 0.28), (8, 8.87e-9, 0.35), (9, 8.53e-10, 0.41),
          (10, 6.95e-11, 0.51), (11, 4.40e-12, 0.60), (12, 1.86e-13, 0.73)]


def table2_rows(cores: int = 4) -> list[dict]:
    rows = []
    for n, t, k, rate in TABLE2:
        it = expected_bf_iterations(n, t, k)
        rows.append({"n": n, "t": t, "k": k, "log2_security": bf_log2(n, t, k),
                     "log2_expected_iterations": expected_bf_log2(n, t, k),
                     "rate": rate, "seconds": it / (rate * cores)})
    return rows


def table3_rows(n: int = 224, t: int = 24, r: float = DEFAULT_R,
                ks: Sequence[int] = range(7, 13)) -> list[dict]:
    return [{"k": k, **{name: hardened_bf_log2(n, t, k, r, c) for name, c in CODES.items()}} for k in ks]


def table4_rows(cores: int = 4, rows=TABLE4) -> list[dict]:
    out = []
    for k, s, n, idt in rows:
        ci = far_interval(s, n)
        lo = median_trials(ci.upper) * idt / cores
        hi = math.inf if ci.lower == 0 else median_trials(ci.lower) * idt / cores
        out.append({"k": k, "accepts": s, "trials": n, "far": point_estimate(TrialRecord(s, n)),
                    "idt": idt, "ci": [ci.lower, ci.upper], "seconds": [lo, hi]})
    return out


def table5_rows(cores: int = 4, D: int = DEFAULT_D, rows=TABLE5) -> list[dict]:
    return [{"k": k, "far": far, "idt": idt, "queries": median_trials(far),
             "seconds": fa_attack_seconds(far, idt, cores, D)} for k, far, idt in rows]


def format_duration(seconds: float) -> str:
    if math.isinf(seconds):
        return "inf"
    for unit, size in (("years", 365.25 * 86400), ("days", 86400), ("hours", 3600),
                       ("min", 60)):
        if seconds >= size:
            return f"{seconds / size:.3g} {unit}"
    return f"{seconds:.3g} sec"


def format_table(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    """Aligned plain-text table."""
    cells = [list(map(str, header))] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)

