#!/usr/bin/env python3
"""Prepare the benchmark datasets as svmlight train/test files under data/.

Sources, tried in order for each dataset:

  pendigits   LIBSVM multiclass/pendigits + pendigits.t
              fallback: keel-ds==0.2.5 wheel from PyPI (penbased.dat, 10992 rows;
              first 7494 rows -> train, remaining 3498 -> test)
  waveform    UCI waveform (21 attributes) is itself a synthetic generator
              (Breiman et al., CART). Regenerated here with a fixed seed,
              5000 rows -> 4400 train / 600 test.
  skin        LIBSVM binary/skin_nonskin (245057 rows; seeded 220543/24507 split)
  shuttle     LIBSVM multiclass/shuttle.scale + shuttle.scale.t
  page-blocks UCI page-blocks (5473 rows; first 4500 -> train, rest -> test)

Every produced file gets a sha256 line in data/SHA256SUMS. Sources that
cannot be reached are reported and skipped.
"""

import argparse
import hashlib
import io
import os
import subprocess
import sys
import tempfile
import urllib.request
import zipfile

import numpy as np

LIBSVM = "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets"
URLS = {
    "pendigits.train": f"{LIBSVM}/multiclass/pendigits",
    "pendigits.test": f"{LIBSVM}/multiclass/pendigits.t",
    "skin": f"{LIBSVM}/binary/skin_nonskin",
    "shuttle.train": f"{LIBSVM}/multiclass/shuttle.scale",
    "shuttle.test": f"{LIBSVM}/multiclass/shuttle.scale.t",
    "page-blocks": "https://archive.ics.uci.edu/static/public/78/page+blocks+classification.zip",
}
KEEL_WHEEL = "keel-ds==0.2.5"
KEEL_WHEEL_SHA256 = "79faf1bd2f3ac2082d16eb9c8c49b2b1a60a5182e94464c5d32c7c642ea9650e"
WAVEFORM_SEED = 20150421


def fetch(url, timeout=30):
    try:
        with urllib.request.urlopen(url, timeout=timeout) as resp:
            return resp.read()
    except Exception as exc:  # noqa: BLE001
        print(f"  unreachable: {url} ({exc})")
        return None


def fmt_value(v):
    r = repr(float(v))
    return r[:-2] if r.endswith(".0") else r


def write_svmlight(path, x, y):
    with open(path, "w", newline="\n") as f:
        for row, label in zip(x, y):
            parts = [str(int(label))]
            parts += [f"{j + 1}:{fmt_value(v)}" for j, v in enumerate(row) if v != 0.0]
            f.write(" ".join(parts) + "\n")


def pendigits(out):
    train = fetch(URLS["pendigits.train"])
    test = fetch(URLS["pendigits.test"])
    if train and test:
        open(os.path.join(out, "pendigits.train"), "wb").write(train)
        open(os.path.join(out, "pendigits.test"), "wb").write(test)
        return True
    with tempfile.TemporaryDirectory() as tmp:
        cmd = [sys.executable, "-m", "pip", "download", "--no-deps", KEEL_WHEEL, "-d", tmp, "-q"]
        if subprocess.run(cmd).returncode != 0:
            print("  keel-ds wheel unavailable")
            return False
        wheel = os.path.join(tmp, os.listdir(tmp)[0])
        digest = hashlib.sha256(open(wheel, "rb").read()).hexdigest()
        if digest != KEEL_WHEEL_SHA256:
            print(f"  keel-ds wheel hash mismatch: {digest}")
            return False
        raw = zipfile.ZipFile(wheel).read("keel_ds/data/balanced/raw/penbased.dat").decode()
    rows = np.array([[float(t) for t in line.split(",")] for line in raw.splitlines() if line.strip()])
    x, y = rows[:, :-1], rows[:, -1].astype(int)
    write_svmlight(os.path.join(out, "pendigits.train"), x[:7494], y[:7494])
    write_svmlight(os.path.join(out, "pendigits.test"), x[7494:], y[7494:])
    return True


def waveform(out, n=5000, n_train=4400):
    rng = np.random.default_rng(WAVEFORM_SEED)
    i = np.arange(1, 22)
    h1 = np.maximum(6 - np.abs(i - 11), 0)
    h2 = np.maximum(6 - np.abs(i - 15), 0)
    h3 = np.maximum(6 - np.abs(i - 7), 0)
    pairs = [(h1, h2), (h1, h3), (h2, h3)]
    y = rng.integers(0, 3, size=n)
    u = rng.uniform(size=n)
    noise = rng.normal(size=(n, 21))
    x = np.empty((n, 21))
    for r in range(n):
        a, b = pairs[y[r]]
        x[r] = u[r] * a + (1 - u[r]) * b + noise[r]
    x = np.round(x, 2)
    write_svmlight(os.path.join(out, "waveform.train"), x[:n_train], y[:n_train])
    write_svmlight(os.path.join(out, "waveform.test"), x[n_train:], y[n_train:])
    return True


def skin(out):
    data = fetch(URLS["skin"])
    if not data:
        return False
    lines = [l for l in data.decode().splitlines() if l.strip()]
    perm = np.random.default_rng(7).permutation(len(lines))
    cut = 220543
    with open(os.path.join(out, "skin.train"), "w", newline="\n") as f:
        f.writelines(lines[i] + "\n" for i in perm[:cut])
    with open(os.path.join(out, "skin.test"), "w", newline="\n") as f:
        f.writelines(lines[i] + "\n" for i in perm[cut:])
    return True


def shuttle(out):
    train = fetch(URLS["shuttle.train"])
    test = fetch(URLS["shuttle.test"])
    if not (train and test):
        return False
    open(os.path.join(out, "shuttle.train"), "wb").write(train)
    open(os.path.join(out, "shuttle.test"), "wb").write(test)
    return True


def page_blocks(out):
    data = fetch(URLS["page-blocks"])
    if not data:
        return False
    z = zipfile.ZipFile(io.BytesIO(data))
    name = next(n for n in z.namelist() if n.endswith("page-blocks.data"))
    rows = np.array([[float(t) for t in l.split()] for l in z.read(name).decode().splitlines() if l.strip()])
    x, y = rows[:, :-1], rows[:, -1].astype(int)
    write_svmlight(os.path.join(out, "page-blocks.train"), x[:4500], y[:4500])
    write_svmlight(os.path.join(out, "page-blocks.test"), x[4500:], y[4500:])
    return True


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "data"))
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    status = {}
    for name, fn in [("pendigits", pendigits), ("waveform", waveform), ("skin", skin),
                     ("shuttle", shuttle), ("page-blocks", page_blocks)]:
        print(f"{name}:")
        status[name] = fn(args.out)
    with open(os.path.join(args.out, "SHA256SUMS"), "w", newline="\n") as f:
        for fname in sorted(os.listdir(args.out)):
            if fname.endswith((".train", ".test")):
                digest = hashlib.sha256(open(os.path.join(args.out, fname), "rb").read()).hexdigest()
                f.write(f"{digest}  {fname}\n")
    for name, ok in status.items():
        print(f"{name:12s} {'ok' if ok else 'MISSING'}")


if __name__ == "__main__":
    main()
