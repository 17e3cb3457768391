"""Energy efficiency against SNR under the passive and active antenna power models."""

from _common import parser, run, table

if __name__ == "__main__":
    args = parser(__doc__).parse_args()
    summary = run(args, ["architecture=both"], "ee")
    for arch in ("passive", "active"):
        print(f"\nmean EE (bits/J), {arch} antennas")
        print(table(summary, "ee_mean", arch))
