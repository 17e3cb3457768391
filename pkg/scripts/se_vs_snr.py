"""Spectral efficiency against SNR for every scheme, with and without 3-bit phase shifters."""

from _common import parser, run, table

if __name__ == "__main__":
    args = parser(__doc__).parse_args()
    for bits, stem in ((None, "se_qinf"), (3, "se_q3")):
        summary = run(args, ["architecture=passive", f"config.quant_bits={'null' if bits is None else bits}"], stem)
        print(f"\nmean SE (bits/s/Hz), quantization {'inf' if bits is None else bits} bits")
        print(table(summary, "se_mean", "passive"))
