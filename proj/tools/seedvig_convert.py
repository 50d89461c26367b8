#!/usr/bin/env python3
"""Convert SEED-VIG .mat recordings to vigil binary session files (.eegs).

Expects the dataset layout
    <root>/Raw_Data/<name>.mat        EEG struct with 'data' (samples x 17) and optionally 'chn'
    <root>/perclos_labels/<name>.mat  'perclos' vector, one value per 8 s epoch
and writes <out>/<name>.eegs for every recording with a matching label file.

Not exercised by the test suite: the recordings are not redistributable.
"""

import argparse
import pathlib
import struct
import sys

import numpy as np
import scipy.io

CHANNELS = ["FT7", "FT8", "T7", "T8", "TP7", "TP8", "CP1", "CP2", "P1",
            "PZ", "P2", "PO3", "POZ", "PO4", "O1", "OZ", "O2"]
FS = 200


def load_eeg(path):
    mat = scipy.io.loadmat(path, squeeze_me=True, struct_as_record=False)
    eeg = mat["EEG"]
    data = np.asarray(eeg.data, dtype=np.float32)
    if data.shape[0] < data.shape[1]:
        data = data.T
    names = CHANNELS
    if hasattr(eeg, "chn"):
        names = [str(c).strip().upper() for c in np.atleast_1d(eeg.chn)]
    index = {n: i for i, n in enumerate(names)}
    missing = [c for c in CHANNELS if c not in index]
    if missing:
        raise ValueError(f"{path}: channels missing: {missing}")
    return data[:, [index[c] for c in CHANNELS]]


def load_perclos(path):
    mat = scipy.io.loadmat(path, squeeze_me=True)
    return np.clip(np.asarray(mat["perclos"], dtype=np.float32).ravel(), 0.0, 1.0)


def encode(data, perclos):
    n_samples, n_ch = data.shape
    out = bytearray(b"EEGS")
    out += struct.pack("<HHIQ", 1, n_ch, FS, n_samples)
    for name in CHANNELS:
        out += name.encode("ascii").ljust(16, b"\0")
    out += np.ascontiguousarray(data.T, dtype="<f4").tobytes()
    out += struct.pack("<I", len(perclos))
    out += np.asarray(perclos, dtype="<f4").tobytes()
    return bytes(out)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("root", type=pathlib.Path)
    ap.add_argument("out", type=pathlib.Path)
    args = ap.parse_args()

    raw = sorted((args.root / "Raw_Data").glob("*.mat"))
    if not raw:
        sys.exit(f"no recordings under {args.root / 'Raw_Data'}")
    args.out.mkdir(parents=True, exist_ok=True)
    for path in raw:
        labels = args.root / "perclos_labels" / path.name
        if not labels.exists():
            print(f"skip {path.name}: no label file", file=sys.stderr)
            continue
        data = load_eeg(path)
        perclos = load_perclos(labels)
        epochs = data.shape[0] // (8 * FS)
        perclos = perclos[:epochs]
        (args.out / (path.stem + ".eegs")).write_bytes(encode(data, perclos))
        print(f"{path.stem}: {data.shape[0]} samples, {len(perclos)} epochs")


if __name__ == "__main__":
    main()
