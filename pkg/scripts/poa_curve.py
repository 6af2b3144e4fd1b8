"""Path-versus-star PoA against tau in the zero-gamma game, one CSV per alpha."""

import argparse
import csv
import io
from pathlib import Path

import numpy as np

from vspc.cli import poa_curve


def summarise(text):
    body = [ln for ln in text.splitlines()[1:] if not ln.startswith("#")]
    rows = list(csv.DictReader(io.StringIO("\n".join(body))))
    tau = np.array([float(r["tau"]) for r in rows])
    poa = np.array([float(r["poa"]) for r in rows])
    k = int(poa.argmax())
    bumps = [(tau[i], poa[i]) for i in range(k + 1, len(poa) - 1)
             if poa[i - 1] < poa[i] >= poa[i + 1]]
    return tau[k], poa[k], bumps, poa[-1]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=10)
    ap.add_argument("--alpha", type=float, nargs="+", default=[0.1, 0.5, 1.0])
    ap.add_argument("--tau-max", type=float, default=20.0)
    ap.add_argument("--step", type=float, default=0.01)
    ap.add_argument("--outdir", type=Path, default=Path("results"))
    args = ap.parse_args()
    args.outdir.mkdir(parents=True, exist_ok=True)
    steps = int(round((args.tau_max - 0.3) / args.step))
    taus = [round(0.3 + k * args.step, 10) for k in range(steps + 1)]
    for alpha in args.alpha:
        text = poa_curve(args.n, alpha, taus)
        out = args.outdir / f"poa_curve_n{args.n}_alpha{alpha:g}.csv"
        out.write_text(text)
        t_peak, peak, bumps, last = summarise(text)
        bump = ", ".join(f"{p:.3f} at tau={t:.2f}" for t, p in bumps) or "none"
        print(f"alpha={alpha:g}: peak {peak:.3f} at tau={t_peak:.2f}; later maxima: {bump}; "
              f"PoA(tau={taus[-1]:g}) = {last:.4f} -> {out}")


if __name__ == "__main__":
    main()
