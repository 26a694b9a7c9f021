"""Data ingestion: CSV tables, feature-to-density conversion, the synthetic
two-class generator, and PPM/PNG image round-trips.

The bundled ``data/cats.csv`` carries the classic anatomical table (sex,
body weight in kg, heart weight in g) for 144 adult cats; set the
``ABKERNELS_DATA`` environment variable to point at a directory with
replacement data files.
"""

import csv
import io
import os
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .measures import validate_density
from .segmentation import RgbImage
from .svm import LabeledDataset, labeled_dataset

DATA_ENV_VAR = "ABKERNELS_DATA"


class DataFormatError(ValueError):
    """Malformed input data; the message carries the location."""


@dataclass(frozen=True)
class RawDataset:
    """Rectangular numeric features with optional +-1 labels."""

    features: np.ndarray
    labels: np.ndarray | None = None
    column_names: tuple | None = None

    def __len__(self):
        return self.features.shape[0]


def load_csv_dataset(path, label_column=None, positive_label=None) -> RawDataset:
    """Parse a numeric CSV with a header row.

    When ``label_column`` is given, that column becomes labels with
    ``positive_label`` mapped to +1 and everything else to -1.  Ragged rows
    and non-numeric feature cells raise :class:`DataFormatError` naming the
    offending row and column.
    """
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
        text = raw.decode("utf-8")
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc}") from None
    except UnicodeDecodeError as exc:
        raise DataFormatError(f"{path} is not UTF-8 text: {exc}") from None
    rows = list(csv.reader(io.StringIO(text)))
    rows = [row for row in rows if row]
    if not rows:
        raise DataFormatError(f"{path}: no header row")
    header = [name.strip() for name in rows[0]]
    width = len(header)
    label_idx = None
    if label_column is not None:
        if label_column not in header:
            raise DataFormatError(
                f"{path}: missing label column {label_column!r}")
        label_idx = header.index(label_column)
    features, labels = [], []
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise DataFormatError(
                f"{path}: row {r} has {len(row)} cells, expected {width}")
        feat = []
        for c, cell in enumerate(row):
            if c == label_idx:
                labels.append(1 if cell.strip() == str(positive_label) else -1)
                continue
            try:
                feat.append(float(cell))
            except ValueError:
                raise DataFormatError(
                    f"{path}: non-numeric cell at row {r}, column "
                    f"{header[c]!r}: {cell!r}") from None
        features.append(feat)
    if not features or not features[0]:
        raise DataFormatError(f"{path}: no feature data")
    names = tuple(n for i, n in enumerate(header) if i != label_idx)
    return RawDataset(np.array(features, dtype=float),
                      np.array(labels, dtype=int) if label_idx is not None else None,
                      names)


def data_path(filename) -> str:
    """Resolve a bundled data file, honoring the data-directory override."""
    override = os.environ.get(DATA_ENV_VAR)
    if override:
        return os.path.join(override, filename)
    return str(resources.files("abkernels").joinpath("data", filename))


def load_cats(positive_label="F") -> RawDataset:
    """The bundled cats table: label Sex, features (Bwt, Hwt)."""
    return load_csv_dataset(data_path("cats.csv"), label_column="Sex",
                            positive_label=positive_label)


def to_densities(data: RawDataset, mode="simplex", epsilon=1e-9):
    """Turn feature rows into densities over unit-weight atoms.

    ``simplex`` floors each row at ``epsilon`` and normalizes it to a
    probability vector; ``raw-positive`` only floors, treating rows as
    finite positive measures.
    """
    if mode not in ("simplex", "raw-positive"):
        raise DataFormatError(f"unknown density mode {mode!r}")
    if not (epsilon > 0):
        raise DataFormatError("epsilon must be positive")
    X = data.features
    if np.any(X < 0):
        r, c = np.argwhere(X < 0)[0]
        raise DataFormatError(
            f"negative feature at row {r}, column {c}: densities need "
            "nonnegative features")
    out = []
    for r, row in enumerate(X):
        if mode == "simplex" and not np.any(row > 0):
            raise DataFormatError(f"row {r} sums to zero; cannot normalize")
        row = np.maximum(row, epsilon)
        if mode == "simplex":
            row = row / row.sum()
        out.append(validate_density(row))
    return out


DEFAULT_CONCENTRATION_A = (5.0, 5.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0)
DEFAULT_CONCENTRATION_B = (1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 5.0, 5.0)


def synth_two_class(n_per_class, atoms=8, concentration_a=None,
                    concentration_b=None, seed=None) -> LabeledDataset:
    """Two well-separated classes of random probability vectors.

    Each density is a normalized vector of independent Gamma(shape, 1)
    draws, i.e. Dirichlet with the given concentration; the two classes get
    mirrored concentration profiles by default.  Deterministic per seed.
    """
    if seed is None:
        raise DataFormatError("synthetic generator requires an explicit seed")
    conc_a = np.asarray(concentration_a if concentration_a is not None
                        else DEFAULT_CONCENTRATION_A, dtype=float)
    conc_b = np.asarray(concentration_b if concentration_b is not None
                        else DEFAULT_CONCENTRATION_B, dtype=float)
    if conc_a.shape != (atoms,) or conc_b.shape != (atoms,):
        raise DataFormatError("concentration vectors must have length atoms")
    if np.any(conc_a <= 0) or np.any(conc_b <= 0):
        raise DataFormatError("concentrations must be positive")
    rng = np.random.default_rng(seed)
    densities, labels = [], []
    for conc, label in ((conc_a, 1), (conc_b, -1)):
        draws = rng.gamma(shape=conc, scale=1.0, size=(n_per_class, atoms))
        draws /= draws.sum(axis=1, keepdims=True)
        densities.extend(validate_density(row) for row in draws)
        labels.extend([label] * n_per_class)
    return labeled_dataset(densities, labels)


# --- image files ----------------------------------------------------------


def _parse_ppm_tokens(raw, path):
    """Header tokens of a P6 file: magic, width, height, maxval."""
    tokens = []
    pos = 0
    while len(tokens) < 4:
        if pos >= len(raw):
            raise DataFormatError(f"{path}: truncated header at offset {pos}")
        ch = raw[pos:pos + 1]
        if ch in b" \t\r\n":
            pos += 1
            continue
        if ch == b"#":
            end = raw.find(b"\n", pos)
            pos = len(raw) if end < 0 else end + 1
            continue
        start = pos
        while pos < len(raw) and raw[pos:pos + 1] not in b" \t\r\n#":
            pos += 1
        tokens.append(raw[start:pos])
    # exactly one whitespace byte separates the maxval from the pixel data
    if pos >= len(raw) or raw[pos:pos + 1] not in b" \t\r\n":
        raise DataFormatError(f"{path}: missing whitespace after maxval")
    return tokens, pos + 1


def load_image(path) -> RgbImage:
    """Read a binary PPM (P6, 8-bit); PNG works when Pillow is installed."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc}") from None
    if raw[:8] == b"\x89PNG\r\n\x1a\n":
        return _load_png(raw, path)
    if raw[:2] != b"P6":
        raise DataFormatError(f"{path}: not a P6 PPM or PNG file")
    tokens, offset = _parse_ppm_tokens(raw, path)
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise DataFormatError(f"{path}: malformed header {tokens!r}") from None
    if tokens[0] != b"P6" or width < 1 or height < 1:
        raise DataFormatError(f"{path}: malformed header {tokens!r}")
    if maxval != 255:
        raise DataFormatError(f"{path}: unsupported maxval {maxval} (need 255)")
    need = 3 * width * height
    data = raw[offset:offset + need]
    if len(data) < need:
        raise DataFormatError(
            f"{path}: truncated pixel data at offset {offset + len(data)} "
            f"(expected {need} bytes)")
    pixels = np.frombuffer(data, dtype=np.uint8).reshape(height, width, 3)
    return RgbImage(pixels.copy())


def _load_png(raw, path):
    try:
        from PIL import Image
    except ImportError:
        raise DataFormatError(
            f"{path}: PNG support requires Pillow") from None
    img = Image.open(io.BytesIO(raw)).convert("RGB")
    return RgbImage(np.asarray(img, dtype=np.uint8))


def png_supported() -> bool:
    try:
        from PIL import Image  # noqa: F401
        return True
    except ImportError:
        return False


def write_image(image: RgbImage, path) -> None:
    """Write PPM (canonical P6 header) or PNG depending on the extension."""
    if str(path).lower().endswith(".png"):
        try:
            from PIL import Image
        except ImportError:
            raise DataFormatError("PNG support requires Pillow") from None
        Image.fromarray(image.pixels, mode="RGB").save(path, format="PNG")
        return
    header = f"P6\n{image.width} {image.height}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header + image.pixels.tobytes())
