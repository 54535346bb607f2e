"""Dataset generation and bit-exact binary storage.

Split file format (little-endian throughout):

    header (32 bytes):
        magic          4 bytes  b"DRAD"
        format_version u16
        n_classes      u16
        signal_length  u32
        record_count   u64
        reserved       12 bytes, zero

    record (4 + signal_length*8 bytes, 8196 for length 1024):
        class_index    u16
        snr_db         i16   (two's complement)
        iq             signal_length x 2 f32, I then Q interleaved

The manifest is stored alongside the splits as a UTF-8 key/value text
file listing the class names in index order, the SNR grid, per-cell
counts and the master seed.

Example i of cell (class, snr) in a split is generated from the key
hash(master_seed, split, class, snr, i), so output bytes are independent
of generation order and worker count.
"""

import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import rng as rngmod
from . import waveforms
from .signal import DEFAULT_SAMPLE_RATE_HZ, DEFAULT_SIGNAL_LENGTH, NoiseSpec, apply_snr

FORMAT_VERSION = 1
_MAGIC = b"DRAD"
_HEADER = struct.Struct("<4sHHIQ12x")
assert _HEADER.size == 32

SPLIT_NAMES = ("train", "val", "test")


class DataError(Exception):
    """Raised for malformed dataset files or inconsistent inputs."""


def _record_dtype(signal_length: int) -> np.dtype:
    return np.dtype(
        [("class_index", "<u2"), ("snr_db", "<i2"), ("iq", "<c8", (signal_length,))]
    )


@dataclass
class DatasetManifest:
    """Everything needed to regenerate a dataset byte-for-byte."""

    dataset_name: str
    class_names: Sequence[str]
    snr_grid_db: Sequence[int]
    per_cell_counts: tuple  # (train, val, test) examples per (class, SNR) cell
    master_seed: int
    sample_rate_hz: float = DEFAULT_SAMPLE_RATE_HZ
    signal_length: int = DEFAULT_SIGNAL_LENGTH
    format_version: int = FORMAT_VERSION

    def __post_init__(self):
        self.class_names = tuple(self.class_names)
        self.snr_grid_db = tuple(int(s) for s in self.snr_grid_db)
        self.per_cell_counts = tuple(int(c) for c in self.per_cell_counts)
        if not self.class_names:
            raise DataError("manifest needs at least one class")
        if any(b <= a for a, b in zip(self.snr_grid_db, self.snr_grid_db[1:])):
            raise DataError("snr_grid_db must be strictly increasing")
        if len(self.per_cell_counts) != 3 or any(c < 0 for c in self.per_cell_counts):
            raise DataError("per_cell_counts must be three non-negative integers")

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    @property
    def n_cells(self) -> int:
        return self.n_classes * len(self.snr_grid_db)

    def total_counts(self) -> tuple:
        """(train, val, test) record totals over all (class, SNR) cells."""
        return tuple(self.n_cells * c for c in self.per_cell_counts)


def deepradar_manifest(master_seed: int = 2022, per_cell_counts=(1200, 400, 400)) -> DatasetManifest:
    """Default 23-class manifest: SNR -12:2:20 dB, 1200/400/400 per cell."""
    return DatasetManifest(
        dataset_name="deepradar2022",
        class_names=waveforms.DEEPRADAR_CLASSES,
        snr_grid_db=range(-12, 21, 2),
        per_cell_counts=per_cell_counts,
        master_seed=master_seed,
    )


def eightclass_manifest(master_seed: int = 8, per_cell_counts=(1200, 400, 400)) -> DatasetManifest:
    """8-class comparison manifest: SNR -20:2:20 dB."""
    return DatasetManifest(
        dataset_name="eightclass",
        class_names=waveforms.EIGHTCLASS_CLASSES,
        snr_grid_db=range(-20, 21, 2),
        per_cell_counts=per_cell_counts,
        master_seed=master_seed,
    )


class SplitData:
    """In-memory (or memory-mapped) view of one split file."""

    def __init__(self, signals, class_index, snr_db, n_classes):
        self.signals = signals          # (N, L) complex64
        self.class_index = class_index  # (N,) uint16
        self.snr_db = snr_db            # (N,) int16
        self.n_classes = int(n_classes)

    def __len__(self) -> int:
        return len(self.signals)

    def __getitem__(self, i):
        return LabeledExample(
            signal=self.signals[i],
            class_index=int(self.class_index[i]),
            snr_db=int(self.snr_db[i]),
        )

    def subset(self, mask) -> "SplitData":
        return SplitData(
            self.signals[mask], self.class_index[mask], self.snr_db[mask], self.n_classes
        )


@dataclass
class LabeledExample:
    signal: np.ndarray
    class_index: int
    snr_db: int


def generate_example(
    manifest: DatasetManifest,
    split: int,
    class_index: int,
    snr_db: int,
    index: int,
    with_clean: bool = False,
):
    """Deterministically generate one labeled example.

    The per-example generator is keyed on (master_seed, split, class,
    snr, index); spec sampling, waveform-internal draws and the noise
    realization consume it in that fixed order.
    """
    gen = rngmod.stream(
        manifest.master_seed, rngmod.DOMAIN_EXAMPLE, split, class_index, snr_db, index
    )
    spec = waveforms.sample_spec(
        manifest.class_names[class_index], gen, manifest.sample_rate_hz
    )
    clean = waveforms.synthesize(spec, gen, manifest.signal_length)
    noisy = apply_snr(clean, NoiseSpec(snr_db), gen)
    if with_clean:
        return noisy, clean
    return noisy


def _cell_records(args):
    manifest, split, class_index, snr_db = args
    count = manifest.per_cell_counts[split]
    rec = np.zeros(count, dtype=_record_dtype(manifest.signal_length))
    rec["class_index"] = class_index
    rec["snr_db"] = snr_db
    for i in range(count):
        rec["iq"][i] = generate_example(manifest, split, class_index, snr_db, i)
    return rec.tobytes()


def build_dataset(manifest: DatasetManifest, out_dir, threads: int = 1) -> dict:
    """Write train/val/test split files plus the manifest text file.

    Cells are generated class-major then SNR-major; with threads > 1 the
    cells are produced by a process pool but written in the same fixed
    order, so the output bytes never depend on the worker count.
    Returns a dict of written paths.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {}
    cells = [
        (ci, snr)
        for ci in range(manifest.n_classes)
        for snr in manifest.snr_grid_db
    ]
    for split, split_name in enumerate(SPLIT_NAMES):
        count = manifest.per_cell_counts[split] * manifest.n_cells
        path = out_dir / f"{split_name}.split"
        with open(path, "wb") as fh:
            fh.write(
                _HEADER.pack(
                    _MAGIC,
                    manifest.format_version,
                    manifest.n_classes,
                    manifest.signal_length,
                    count,
                )
            )
            jobs = [(manifest, split, ci, snr) for ci, snr in cells]
            if threads > 1:
                with ProcessPoolExecutor(max_workers=threads) as pool:
                    for chunk in pool.map(_cell_records, jobs, chunksize=1):
                        fh.write(chunk)
            else:
                for job in jobs:
                    fh.write(_cell_records(job))
        paths[split_name] = path
    paths["manifest"] = save_manifest(manifest, out_dir / "manifest.txt")
    return paths


def write_split(examples: SplitData, path) -> Path:
    """Serialize examples to the native split format (see module docs)."""
    if len(examples) == 0:
        raise DataError("refusing to write an empty split")
    length = examples.signals.shape[1]
    rec = np.zeros(len(examples), dtype=_record_dtype(length))
    rec["class_index"] = examples.class_index
    rec["snr_db"] = examples.snr_db
    rec["iq"] = examples.signals
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(
            _HEADER.pack(_MAGIC, FORMAT_VERSION, examples.n_classes, length, len(examples))
        )
        fh.write(rec.tobytes())
    return path


def read_split(path, mmap: bool = False) -> SplitData:
    """Read and validate a split file.

    Raises DataError with a distinct message for a bad magic, an
    unsupported format version, a truncated record section, or an
    out-of-range class index. ``mmap=True`` maps the record section
    instead of loading it.
    """
    path = Path(path)
    size = path.stat().st_size
    if size < _HEADER.size:
        raise DataError(f"{path}: truncated header")
    with open(path, "rb") as fh:
        magic, version, n_classes, length, count = _HEADER.unpack(fh.read(_HEADER.size))
    if magic != _MAGIC:
        raise DataError(f"{path}: bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise DataError(f"{path}: unsupported format version {version}")
    dtype = _record_dtype(length)
    if size - _HEADER.size != count * dtype.itemsize:
        raise DataError(
            f"{path}: truncated record section "
            f"({size - _HEADER.size} bytes for {count} records of {dtype.itemsize})"
        )
    if mmap:
        rec = np.memmap(path, dtype=dtype, mode="r", offset=_HEADER.size, shape=(count,))
    else:
        with open(path, "rb") as fh:
            fh.seek(_HEADER.size)
            rec = np.frombuffer(fh.read(), dtype=dtype)
    if rec["class_index"].size and int(rec["class_index"].max(initial=0)) >= n_classes:
        raise DataError(f"{path}: class index out of range")
    return SplitData(rec["iq"], rec["class_index"], rec["snr_db"], n_classes)


# -- manifest text format ----------------------------------------------------

def save_manifest(manifest: DatasetManifest, path) -> Path:
    path = Path(path)
    lines = [
        f"dataset_name = {manifest.dataset_name}",
        f"class_names = {','.join(manifest.class_names)}",
        f"snr_grid_db = {','.join(str(s) for s in manifest.snr_grid_db)}",
        f"per_cell_counts = {','.join(str(c) for c in manifest.per_cell_counts)}",
        f"master_seed = {manifest.master_seed}",
        f"sample_rate_hz = {manifest.sample_rate_hz!r}",
        f"signal_length = {manifest.signal_length}",
        f"format_version = {manifest.format_version}",
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def load_manifest(path) -> DatasetManifest:
    fields = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DataError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        fields[key] = value
    try:
        return DatasetManifest(
            dataset_name=fields["dataset_name"],
            class_names=fields["class_names"].split(","),
            snr_grid_db=[int(s) for s in fields["snr_grid_db"].split(",")],
            per_cell_counts=tuple(int(c) for c in fields["per_cell_counts"].split(",")),
            master_seed=int(fields["master_seed"]),
            sample_rate_hz=float(fields["sample_rate_hz"]),
            signal_length=int(fields["signal_length"]),
            format_version=int(fields["format_version"]),
        )
    except KeyError as exc:
        raise DataError(f"{path}: missing manifest key {exc.args[0]!r}") from None


# -- external import ---------------------------------------------------------

@dataclass
class ImportLayout:
    """Describes a raw external IQ file for conversion.

    The data file must hold record_count x signal_length complex samples
    as f32 little-endian pairs; ``iq_order`` is "interleaved" (I0 Q0 I1
    Q1 ...) or "split" (all I then all Q per record). Labels come from a
    side CSV with one "class_index,snr_db" row per record.
    """

    signal_length: int
    class_names: Sequence[str]
    labels_path: Path
    iq_order: str = "interleaved"


def import_external(data_path, layout: ImportLayout, out_path) -> Path:
    """Convert a described raw IQ file into a native split file."""
    data_path = Path(data_path)
    raw = np.fromfile(data_path, dtype="<f4")
    if raw.size == 0:
        raise DataError(f"{data_path}: empty input")
    per_record = 2 * layout.signal_length
    if raw.size % per_record:
        raise DataError(
            f"{data_path}: length mismatch: {raw.size} floats is not a multiple "
            f"of {per_record} (records of {layout.signal_length} IQ samples)"
        )
    n = raw.size // per_record
    if layout.iq_order == "interleaved":
        iq = raw.reshape(n, layout.signal_length, 2)
    elif layout.iq_order == "split":
        planes = raw.reshape(n, 2, layout.signal_length)
        iq = np.stack([planes[:, 0, :], planes[:, 1, :]], axis=-1)
    else:
        raise DataError(f"unknown iq_order {layout.iq_order!r}")
    signals = (iq[..., 0] + 1j * iq[..., 1]).astype(np.complex64)

    labels = np.loadtxt(layout.labels_path, delimiter=",", dtype=np.int64, ndmin=2)
    if labels.shape[0] != n or labels.shape[1] != 2:
        raise DataError(
            f"{layout.labels_path}: expected {n} 'class_index,snr_db' rows, "
            f"got shape {labels.shape}"
        )
    n_classes = len(layout.class_names)
    if labels[:, 0].min() < 0 or labels[:, 0].max() >= n_classes:
        raise DataError(f"{layout.labels_path}: class index out of range")
    split = SplitData(
        signals,
        labels[:, 0].astype(np.uint16),
        labels[:, 1].astype(np.int16),
        n_classes,
    )
    return write_split(split, out_path)
