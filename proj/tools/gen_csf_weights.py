#!/usr/bin/env python3
"""Writes Watson wavelet CSF weights as the JSON fixture read by the engine.

Threshold Y = a * 10^(k * (log10(f / (g_theta * f0)))^2) at f = r * 2^-level
cycles/degree; the weight is a / Y so each channel peaks at 1.
"""
import argparse
import json
import math

PARAMS = {
    "achromatic": dict(a=0.495, k=0.466, f0=0.401, g=(1.501, 1.0, 0.534)),
    "blue-yellow": dict(a=1.633, k=0.353, f0=0.209, g=(1.520, 1.0, 0.502)),
    "red-green": dict(a=0.944, k=0.521, f0=0.404, g=(1.868, 1.0, 0.516)),
}
ORIENT_G = {"A": 0, "H": 1, "V": 1, "D": 2}


def weight(p, level, orientation, r):
    f = r * 2.0 ** -level
    g = p["g"][ORIENT_G[orientation]]
    y = p["a"] * 10 ** (p["k"] * math.log10(f / (g * p["f0"])) ** 2)
    return p["a"] / y


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--resolution", type=float, default=28.5, help="pixels per degree after rescaling")
    ap.add_argument("--levels", type=int, default=4)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()
    entries = []
    for channel in ("achromatic", "red-green", "blue-yellow"):
        for level in range(1, args.levels + 1):
            for orientation in ("H", "V", "D"):
                entries.append(dict(channel=channel, level=level, orientation=orientation,
                                    weight=weight(PARAMS[channel], level, orientation, args.resolution)))
            if level == args.levels:
                entries.append(dict(channel=channel, level=level, orientation="A",
                                    weight=weight(PARAMS[channel], level, "A", args.resolution)))
    text = json.dumps({"resolution_ppd": args.resolution, "entries": entries}, indent=2) + "\n"
    if args.out == "-":
        print(text, end="")
    else:
        with open(args.out, "w") as fh:
            fh.write(text)


if __name__ == "__main__":
    main()
